//! Minimal SVG scatter of posterior totals against state index.

use std::fmt::Write;

use qib_core::states::Family;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 50.0;

pub struct Point {
    pub index: usize,
    pub value: f64,
    pub family: Family,
}

fn colour(f: Family) -> &'static str {
    match f {
        Family::Pure => "#1f77b4",
        Family::Product => "#ff7f0e",
        Family::Bell => "#2ca02c",
        Family::Ghz => "#d62728",
        Family::Mixed => "#7f7f7f",
    }
}

/// Scatter with a dashed line at the qubit count `n`. `states` fixes the
/// x range so failed states leave gaps.
pub fn scatter(points: &[Point], n: usize, states: usize) -> String {
    let y_max = (n as f64 + 0.5).max(points.iter().map(|p| p.value).fold(0.0, f64::max) * 1.05);
    let x_span = states.saturating_sub(1).max(1) as f64;
    let x = |i: usize| MARGIN + (WIDTH - 2.0 * MARGIN) * i as f64 / x_span;
    let y = |v: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * v / y_max;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (x0, x1, yb, yt) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(
        s,
        r#"<path d="M{x0} {yt} L{x0} {yb} L{x1} {yb}" stroke="black" fill="none"/>"#
    );
    for tick in 0..=n {
        let ty = y(tick as f64);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{tick}</text>"#,
            x0 - 6.0,
            ty + 4.0
        );
    }
    let ny = y(n as f64);
    let _ = writeln!(
        s,
        r#"<line x1="{x0}" y1="{ny:.2}" x2="{x1}" y2="{ny:.2}" stroke="black" stroke-dasharray="6 4"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">state index</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {})">posterior information</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for p in points {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"><title>{} #{}: {:.6}</title></circle>"#,
            x(p.index),
            y(p.value),
            colour(p.family),
            p.family.name(),
            p.index,
            p.value
        );
    }
    s.push_str("</svg>\n");
    s
}
