//! Closed-form machinery for two-qubit pure states.
//!
//! A pure state is written as local rotations `O₁`, `O₂` of the canonical
//! form `α′ = β′ = (cos θ, 0, 0)`, `C′ = diag(1, sin θ, -sin θ)`.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use libm::{atan2, cos, sin, sqrt};

use crate::divergence::chi2_bloch;
use crate::pauli::BlochVector;
use crate::{Error, Result};

/// `cos²φ cos²k` below this selects the special case.
pub const SPECIAL_CASE_TOL: f64 = 1e-12;
/// Slack on the `[-1, 1]` and `b₁² + b₂² ≤ 1` domain checks.
const DOMAIN_SLACK: f64 = 1e-12;

/// Angles of a two-qubit pure state; `theta` lies in `[0, π/2]`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PureParams2Q {
    pub theta: f64,
    pub phi: f64,
    pub k: f64,
    pub omega: f64,
    pub phi_p: f64,
    pub k_p: f64,
    pub omega_p: f64,
}

/// Reduced coordinates `μ = cos θ`, `a₁ = cos φ cos k`, `b₁ = cos φ′ cos k′`,
/// `b₂ = cos φ′ sin k′`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Reduced {
    pub mu: f64,
    pub a1: f64,
    pub b1: f64,
    pub b2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

impl PureParams2Q {
    pub fn new(theta: f64, phi: f64, k: f64, omega: f64, phi_p: f64, k_p: f64, omega_p: f64) -> Result<Self> {
        let p = Self {
            theta,
            phi,
            k,
            omega,
            phi_p,
            k_p,
            omega_p,
        };
        if ![theta, phi, k, omega, phi_p, k_p, omega_p]
            .iter()
            .all(|x| x.is_finite())
        {
            return Err(Error::NonFinite);
        }
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(Error::OutOfDomain {
                what: "theta",
                value: theta,
            });
        }
        Ok(p)
    }

    pub fn reduced(&self) -> Reduced {
        Reduced {
            mu: cos(self.theta),
            a1: cos(self.phi) * cos(self.k),
            b1: cos(self.phi_p) * cos(self.k_p),
            b2: cos(self.phi_p) * sin(self.k_p),
        }
    }

    /// True when `cos²φ cos²k` or `cos²φ′ cos²k′` vanishes.
    pub fn is_special_case(&self) -> bool {
        let r = self.reduced();
        r.a1 * r.a1 < SPECIAL_CASE_TOL || r.b1 * r.b1 < SPECIAL_CASE_TOL
    }
}

/// Rotation with first column `(cos φ cos k, -cos φ sin k, sin φ)`.
pub fn rotation(phi: f64, k: f64, omega: f64) -> [[f64; 3]; 3] {
    let (cp, sp) = (cos(phi), sin(phi));
    let (ck, sk) = (cos(k), sin(k));
    let (cw, sw) = (cos(omega), sin(omega));
    [
        [cp * ck, cw * sk + sw * sp * ck, sw * sk - cw * sp * ck],
        [-cp * sk, cw * ck - sw * sp * sk, sw * ck + cw * sp * sk],
        [sp, -sw * cp, cw * cp],
    ]
}

/// Local-marginal vectors and correlation block.
pub fn params_to_blocks(p: &PureParams2Q) -> ([f64; 3], [f64; 3], [[f64; 3]; 3]) {
    let o1 = rotation(p.phi, p.k, p.omega);
    let o2 = rotation(p.phi_p, p.k_p, p.omega_p);
    let (ct, st) = (cos(p.theta), sin(p.theta));
    let diag = [1.0, st, -st];
    let alpha = [ct * o1[0][0], ct * o1[1][0], ct * o1[2][0]];
    let beta = [ct * o2[0][0], ct * o2[1][0], ct * o2[2][0]];
    let mut c = [[0.0; 3]; 3];
    for (i, row) in c.iter_mut().enumerate() {
        for (j, cij) in row.iter_mut().enumerate() {
            *cij = (0..3).map(|m| o1[i][m] * diag[m] * o2[j][m]).sum();
        }
    }
    (alpha, beta, c)
}

/// Natural-order coefficients: `b₂..b₄ = α`, `b₅..b₇ = β`, `b₈..b₁₆ = C`
/// row by row.
pub fn params_to_bloch(p: &PureParams2Q) -> BlochVector {
    let (alpha, beta, c) = params_to_blocks(p);
    let mut b = Vec::with_capacity(16);
    b.push(1.0);
    b.extend_from_slice(&alpha);
    b.extend_from_slice(&beta);
    for row in &c {
        b.extend_from_slice(row);
    }
    BlochVector::new(2, b).expect("rotations keep coefficients in range")
}

/// `atan2` that returns 0 when both arguments vanish, where the angle
/// multiplies a zero amplitude.
fn phase(y: f64, x: f64) -> f64 {
    if y == 0.0 && x == 0.0 {
        0.0
    } else {
        atan2(y, x)
    }
}

/// Auxiliary angles `(ω₁, ω₁′, ω₂′)`.
pub fn auxiliary_angles(p: &PureParams2Q) -> (f64, f64, f64) {
    let w1 = phase(sin(p.k), sin(p.phi) * cos(p.k));
    let w1p = phase(sin(p.k_p), sin(p.phi_p) * cos(p.k_p));
    let w2p = phase(cos(p.k_p), sin(p.phi_p) * sin(p.k_p));
    (w1, w1p, w2p)
}

/// `c₁₁` and `c₁₂` through the phase form; `ω`, `ω′` enter only as `ω + ω′`.
pub fn c11_c12_from_angles(p: &PureParams2Q) -> (f64, f64) {
    let r = p.reduced();
    let (w1, w1p, w2p) = auxiliary_angles(p);
    let s = sin(p.theta);
    let sum = p.omega + p.omega_p;
    let ra = sqrt((1.0 - r.a1 * r.a1).max(0.0));
    let c11 = r.a1 * r.b1 - s * ra * sqrt((1.0 - r.b1 * r.b1).max(0.0)) * cos(sum + w1 + w1p);
    let c12 = -r.a1 * r.b2 + s * ra * sqrt((1.0 - r.b2 * r.b2).max(0.0)) * cos(sum + w1 - w2p);
    (c11, c12)
}

fn check_reduced(r: &Reduced) -> Result<()> {
    for (what, v) in [("mu", r.mu), ("a1", r.a1), ("b1", r.b1), ("b2", r.b2)] {
        if !v.is_finite() {
            return Err(Error::NonFinite);
        }
        if v.abs() > 1.0 + DOMAIN_SLACK {
            return Err(Error::OutOfDomain { what, value: v });
        }
    }
    let norm = r.b1 * r.b1 + r.b2 * r.b2;
    if norm > 1.0 + DOMAIN_SLACK {
        return Err(Error::OutOfDomain {
            what: "b1^2 + b2^2",
            value: norm,
        });
    }
    Ok(())
}

/// Ranges of `c₁₁` and `c₁₂` over `ω + ω′` with everything else fixed.
pub fn c11_c12_bounds(mu: f64, a1: f64, b1: f64, b2: f64) -> Result<(Interval, Interval)> {
    check_reduced(&Reduced { mu, a1, b1, b2 })?;
    let base = (1.0 - mu * mu).max(0.0) * (1.0 - a1 * a1).max(0.0);
    let r11 = sqrt(base * (1.0 - b1 * b1).max(0.0));
    let r12 = sqrt(base * (1.0 - b2 * b2).max(0.0));
    let (m11, m12) = (a1 * b1, -a1 * b2);
    Ok((
        Interval {
            lower: m11 - r11,
            upper: m11 + r11,
        },
        Interval {
            lower: m12 - r12,
            upper: m12 + r12,
        },
    ))
}

/// `(1-μ²)(1-x)(1-y)/(1-xy)`, which tends to 0 as `xy → 1`.
fn block_term(one_minus_mu2: f64, x: f64, y: f64) -> f64 {
    let den = 1.0 - x * y;
    if den <= 0.0 {
        0.0
    } else {
        one_minus_mu2 * (1.0 - x) * (1.0 - y) / den
    }
}

/// Posterior information with the correlation terms charged at their
/// interval extremes: `2μ² + (1-μ²)(1-a₁²)(1-b₁²)/(1-a₁²b₁²) + (1-μ²)(1-a₁²)(1-b₂²)/(1-a₁²b₂²)`.
pub fn closed_form_posterior(mu: f64, a1: f64, b1: f64, b2: f64) -> Result<f64> {
    check_reduced(&Reduced { mu, a1, b1, b2 })?;
    let m = mu.clamp(-1.0, 1.0);
    let marginal = if m.abs() < 1.0 { 2.0 * chi2_bloch(m, 0.0)? } else { 2.0 };
    let omm = 1.0 - m * m;
    let x1 = a1 * a1;
    Ok(marginal + block_term(omm, x1, b1 * b1) + block_term(omm, x1, b2 * b2))
}

/// [`closed_form_posterior`] at the reduced coordinates of `p`, refusing the
/// special cases where the first correlation entries decouple.
pub fn closed_form_from_params(p: &PureParams2Q) -> Result<f64> {
    if p.is_special_case() {
        return Err(Error::SpecialCase("cos^2(phi) cos^2(k)"));
    }
    let r = p.reduced();
    closed_form_posterior(r.mu, r.a1, r.b1, r.b2)
}

/// The four angle choices producing the same marginals and `c₁₁`, `c₁₂`:
/// `(φ, k) → (π - φ, π + k)` on either side, with `ω` shifted to compensate.
pub fn four_angle_sets(p: &PureParams2Q) -> [BlochVector; 4] {
    let flip = |phi: f64, k: f64| (PI - phi, PI + k);
    let (fp, fk) = flip(p.phi, p.k);
    let (fpp, fkp) = flip(p.phi_p, p.k_p);
    let variants = [
        *p,
        PureParams2Q {
            phi: fp,
            k: fk,
            omega: p.omega + PI,
            ..*p
        },
        PureParams2Q {
            phi_p: fpp,
            k_p: fkp,
            omega: p.omega + PI,
            ..*p
        },
        PureParams2Q {
            phi: fp,
            k: fk,
            phi_p: fpp,
            k_p: fkp,
            omega: p.omega + 2.0 * PI,
            ..*p
        },
    ];
    variants.map(|v| params_to_bloch(&v))
}
