use super::*;
use crate::linalg::eigvalsh_unchecked;
use crate::states::{ginibre_mixed, haar_pure, Family, StateSpec};
use approx::assert_abs_diff_eq;
use proptest::prelude::*;

fn cfg() -> Tolerances {
    Tolerances::default()
}

fn solve_prefix(n: usize, prefix: &[f64]) -> BoundResult {
    solve_bounds(&BoundProblem::from_prefix(n, prefix).unwrap(), &cfg()).unwrap()
}

fn bell_bloch() -> Vec<f64> {
    let mut b = vec![0.0; 16];
    b[0] = 1.0;
    b[7] = 1.0; // XX
    b[11] = -1.0; // YY
    b[15] = 1.0; // ZZ
    b
}

/// Bisection on the concave function `x ↦ λ_min(Q(x))` for one free coefficient.
fn exact_interval(p: &BoundProblem, inside: f64) -> (f64, f64) {
    let pencil = p.pencil();
    assert_eq!(pencil.len(), 1);
    let feasible = |x: f64| eigvalsh_unchecked(&pencil.at(&[x]))[0] >= 0.0;
    assert!(feasible(inside));
    let edge = |mut a: f64, mut b: f64| {
        // a feasible, b infeasible
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if feasible(m) {
                a = m;
            } else {
                b = m;
            }
        }
        a
    };
    (edge(inside, -1.5), edge(inside, 1.5))
}

#[test]
fn single_qubit_first_coefficient_spans_ball() {
    let r = solve_prefix(1, &[1.0]);
    assert_abs_diff_eq!(r.lower, -1.0, epsilon = 1e-6);
    assert_abs_diff_eq!(r.upper, 1.0, epsilon = 1e-6);
    assert_eq!(r.status, SolveStatus::Converged);
    assert_eq!(r.epsilon_final, 1e-8);
}

#[test]
fn single_qubit_disc_slice() {
    let r = solve_prefix(1, &[1.0, 0.6]);
    assert_abs_diff_eq!(r.lower, -0.8, epsilon = 1e-6);
    assert_abs_diff_eq!(r.upper, 0.8, epsilon = 1e-6);
}

#[test]
fn bell_cross_term_is_pinned() {
    let b = bell_bloch();
    let r = solve_prefix(2, &b[..8]);
    assert_abs_diff_eq!(r.lower, 0.0, epsilon = 1e-6);
    assert_abs_diff_eq!(r.upper, 0.0, epsilon = 1e-6);
    assert!(r.width() < 1e-6);
}

#[test]
fn zero_prefix_leaves_full_range() {
    let mut prefix = vec![0.0; 7];
    prefix[0] = 1.0;
    let r = solve_prefix(2, &prefix);
    assert_abs_diff_eq!(r.lower, -1.0, epsilon = 1e-6);
    assert_abs_diff_eq!(r.upper, 1.0, epsilon = 1e-6);
}

#[test]
fn bell_yy_on_xx_face() {
    let b = bell_bloch();
    let p = BoundProblem::from_prefix(2, &b[..11])
        .unwrap()
        .with_hint(b.clone())
        .unwrap();
    let r = solve_bounds(&p, &cfg()).unwrap();
    assert_abs_diff_eq!(r.lower, -1.0, epsilon = 1e-6);
    assert_abs_diff_eq!(r.upper, 1.0, epsilon = 1e-6);
}

#[test]
fn phase_one_finds_sampled_state() {
    let rho = haar_pure(2, 5).unwrap();
    let b = rho.bloch();
    let p = BoundProblem::from_prefix(2, &b.as_slice()[..9]).unwrap();
    match phase_one(&p, &cfg()).unwrap() {
        PhaseOne::Feasible { completion, min_eig } => {
            assert!(min_eig >= -1e-9);
            assert_eq!(&completion[..9], &b.as_slice()[..9]);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn phase_one_rejects_inconsistent_prefix() {
    let mut prefix = vec![0.0; 9];
    prefix[0] = 1.0;
    prefix[7] = 1.0;
    prefix[8] = 1.0;
    let p = BoundProblem::from_prefix(2, &prefix).unwrap();
    match phase_one(&p, &cfg()).unwrap() {
        PhaseOne::Infeasible { s_star } => assert!(s_star > 1e-7),
        other => panic!("{other:?}"),
    }
    let r = solve_bounds(&p, &cfg()).unwrap();
    assert_eq!(r.status, SolveStatus::Infeasible);
    assert!(r.lower.is_nan());
}

#[test]
fn ball_boundary_forces_zero() {
    let r = solve_prefix(1, &[1.0, 1.0]);
    assert_abs_diff_eq!(r.lower, 0.0, epsilon = 1e-6);
    assert_abs_diff_eq!(r.upper, 0.0, epsilon = 1e-6);
    let p = BoundProblem::from_prefix(1, &[1.0, 1.0]).unwrap();
    assert!(matches!(phase_one(&p, &cfg()).unwrap(), PhaseOne::Feasible { .. }));
}

#[test]
fn grid_oracle_disc() {
    let p = BoundProblem::from_prefix(1, &[1.0, 0.6]).unwrap();
    let (lo, hi) = grid_oracle(&p, 400).unwrap().unwrap();
    let cell = 2.0 / 400.0;
    assert!(lo >= -0.8 - 1e-12 && lo <= -0.8 + cell);
    assert!(hi <= 0.8 + 1e-12 && hi >= 0.8 - cell);
}

#[test]
fn grid_oracle_rejects_large_problems() {
    let p = BoundProblem::from_prefix(2, &[1.0]).unwrap();
    assert!(matches!(grid_oracle(&p, 4), Err(Error::TooManyFreeVariables(15))));
}

#[test]
fn grid_oracle_pinned_bell_face() {
    let b = bell_bloch();
    let p = BoundProblem::from_prefix(2, &b[..11]).unwrap();
    // free: 12 (target), 13..16; pin two of them at the true values
    let (lo, _) = grid_oracle_pinned(&p, 40, &[(13, b[12]), (14, b[13])])
        .unwrap()
        .unwrap();
    assert_abs_diff_eq!(lo, -1.0, epsilon = 1e-12);
    let r = solve_bounds(&p, &cfg()).unwrap();
    assert!(r.lower <= lo + 1e-6);
}

#[test]
fn exact_one_dimensional_intervals() {
    for seed in 0..4 {
        let rho = ginibre_mixed(2, 4, seed).unwrap();
        let b = rho.bloch();
        let p = BoundProblem::from_prefix(2, &b.as_slice()[..15]).unwrap();
        let (lo, hi) = exact_interval(&p, b.as_slice()[15]);
        let r = solve_bounds(&p, &cfg()).unwrap();
        assert_abs_diff_eq!(r.lower, lo, epsilon = 1e-6);
        assert_abs_diff_eq!(r.upper, hi, epsilon = 1e-6);
    }
    let p = BoundProblem::from_prefix(1, &[1.0, 0.3, -0.4]).unwrap();
    let (lo, hi) = exact_interval(&p, 0.0);
    assert_abs_diff_eq!(hi, libm::sqrt(1.0 - 0.25), epsilon = 1e-12);
    let r = solve_bounds(&p, &cfg()).unwrap();
    assert_abs_diff_eq!(r.lower, lo, epsilon = 1e-7);
    assert_abs_diff_eq!(r.upper, hi, epsilon = 1e-7);
}

#[test]
fn newton_budget_is_enforced() {
    let mut c = cfg();
    c.max_newton_steps = 2;
    let p = BoundProblem::from_prefix(2, &[1.0, 0.1]).unwrap();
    assert!(matches!(solve_bounds(&p, &c), Err(Error::NoConvergence { .. })));
}

#[test]
fn validation() {
    assert!(BoundProblem::from_prefix(1, &[0.5]).is_err());
    assert!(BoundProblem::from_prefix(1, &[1.0, 1.5]).is_err());
    assert!(BoundProblem::from_prefix(1, &[1.0, 0.0, 0.0, 0.0]).is_err());
    assert!(BoundProblem::new(1, 1, &[]).is_err());
    assert!(BoundProblem::new(1, 2, &[(2, 0.0)]).is_err());
    assert!(BoundProblem::new(1, 3, &[(2, 0.5)])
        .unwrap()
        .with_hint(vec![1.0])
        .is_err());
}

fn state_bloch(family: Family, n: usize, seed: u64) -> Vec<f64> {
    StateSpec::new(family, n, seed)
        .generate()
        .unwrap()
        .bloch()
        .as_slice()
        .to_vec()
}

/// Walks the natural order and returns every interval.
fn walk(b: &[f64], n: usize, c: &Tolerances) -> Vec<BoundResult> {
    (2..=b.len())
        .map(|k| {
            let p = BoundProblem::from_prefix(n, &b[..k - 1])
                .unwrap()
                .with_hint(b.to_vec())
                .unwrap();
            solve_bounds(&p, c).unwrap()
        })
        .collect()
}

#[test]
fn walks_contain_truth_and_respect_box() {
    for (family, n, seed) in [
        (Family::Pure, 2, 1),
        (Family::Mixed, 2, 2),
        (Family::Bell, 2, 3),
        (Family::Product, 2, 4),
        (Family::Pure, 1, 9),
    ] {
        let b = state_bloch(family, n, seed);
        for (k, r) in (2..).zip(walk(&b, n, &cfg())) {
            assert_ne!(r.status, SolveStatus::Infeasible);
            assert!(r.lower <= r.upper + 1e-9);
            assert!(r.lower >= -1.0 - 1e-9 && r.upper <= 1.0 + 1e-9, "{family:?} {k} {r:?}");
            assert!(
                b[k - 1] >= r.lower - 1e-6 && b[k - 1] <= r.upper + 1e-6,
                "{family:?} {k}"
            );
            for w in r.levels.windows(2) {
                // configured largest first: later (smaller) levels nest inside earlier ones
                assert!(
                    w[1].lower >= w[0].lower - 1e-9 && w[1].upper <= w[0].upper + 1e-9,
                    "{:?}",
                    r.levels
                );
            }
        }
    }
}

#[test]
fn facial_reduction_agrees_with_plain_regularization() {
    let mut plain = cfg();
    plain.facial_reduction = false;
    for (family, seed) in [(Family::Mixed, 11), (Family::Pure, 12)] {
        let b = state_bloch(family, 2, seed);
        for (a, c) in walk(&b, 2, &cfg()).iter().zip(walk(&b, 2, &plain)) {
            assert_abs_diff_eq!(a.lower, c.lower, epsilon = 1e-3);
            assert_abs_diff_eq!(a.upper, c.upper, epsilon = 1e-3);
        }
    }
}

#[test]
fn three_qubit_walk_fits_budget() {
    let b = state_bloch(Family::Ghz, 3, 7);
    for r in walk(&b, 3, &cfg()) {
        assert!(r.iterations <= 500);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn appending_never_widens(seed in 0u64..1000, k in 3usize..15, mixed in any::<bool>()) {
        let family = if mixed { Family::Mixed } else { Family::Pure };
        let b = state_bloch(family, 2, seed);
        let later = k + 1;
        let short = BoundProblem::new(2, later, &(1..k - 1).map(|j| (j, b[j - 1])).collect::<Vec<_>>()).unwrap();
        let long = BoundProblem::from_prefix(2, &b[..k]).unwrap();
        let r_short = solve_bounds(&short.with_hint(b.clone()).unwrap(), &cfg()).unwrap();
        let r_long = solve_bounds(&long.with_hint(b.clone()).unwrap(), &cfg()).unwrap();
        prop_assert!(r_long.lower >= r_short.lower - 1e-6);
        prop_assert!(r_long.upper <= r_short.upper + 1e-6);
    }

    #[test]
    fn grid_inside_solver(a in -0.7f64..0.7, c in -0.7f64..0.7) {
        prop_assume!(a * a + c * c < 0.95);
        let p = BoundProblem::new(1, 3, &[(2, a)]).unwrap();
        let r = solve_bounds(&p, &cfg()).unwrap();
        if let Some((lo, hi)) = grid_oracle(&p, 60).unwrap() {
            prop_assert!(lo >= r.lower - 1e-6 && hi <= r.upper + 1e-6);
        }
        let q = BoundProblem::new(1, 4, &[(2, a), (3, c)]).unwrap();
        let r = solve_bounds(&q, &cfg()).unwrap();
        let exact = libm::sqrt(1.0 - a * a - c * c);
        prop_assert!((r.upper - exact).abs() < 1e-6 && (r.lower + exact).abs() < 1e-6);
    }
}
