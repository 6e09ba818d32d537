//! Bounds on one Bloch coefficient over all PSD completions of the
//! coefficients fixed so far.
//!
//! With the coefficients in `F` fixed, the free ones `x` enter
//! `Q(x) = (Σ_{j∈F} b_j T_j + Σ_l x_l T_l) / 2^n` linearly, and the bounds are
//! `min ±x_target` subject to `Q(x) ⪰ 0`. The explicit box `|x_l| ≤ 1` is
//! omitted: trace one and `‖T_j‖ = 1` already imply it.
//!
//! Each problem is first restricted to its minimal face (see
//! [`Tolerances::facial_reduction`]), then solved with a log-barrier path
//! from the analytic center at every regularization level `Q + εI ⪰ 0`.

mod barrier;
mod face;
mod oracle;

use alloc::vec;
use alloc::vec::Vec;

use barrier::{Barrier, Budget, Pencil};
use face::{min_eig_at, phase_one_pencil, reduce, Face, Reduction};
pub use oracle::{grid_oracle, grid_oracle_pinned};

use crate::config::Tolerances;
use crate::linalg::ComplexMatrix;
use crate::pauli::{self, BasisIndex, BLOCH_SLACK};
use crate::{Error, Result};

/// Bound problem for coefficient `target` given fixed values of others.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundProblem {
    n: usize,
    target: usize,
    /// `(j, b_j)` sorted by `j`; always contains `(1, 1.0)`.
    fixed: Vec<(usize, f64)>,
    /// A full coefficient list `b_1..b_{4^n}` whose free part is feasible.
    feasible_hint: Option<Vec<f64>>,
}

impl BoundProblem {
    /// Fixes the listed coefficients (1-based natural indices). `b_1 = 1`
    /// is added when absent.
    pub fn new(n: usize, target: usize, fixed: &[(usize, f64)]) -> Result<Self> {
        let total = pauli::num_coefficients(n);
        BasisIndex::new(n, target)?;
        if target == 1 {
            return Err(Error::IndexOutOfRange { j: target, n });
        }
        let mut list: Vec<(usize, f64)> = Vec::with_capacity(fixed.len() + 1);
        for &(j, b) in fixed {
            if j == 0 || j > total {
                return Err(Error::IndexOutOfRange { j, n });
            }
            if j == target || list.iter().any(|&(k, _)| k == j) {
                return Err(Error::InvalidOrder("coefficient fixed twice or target fixed"));
            }
            if !b.is_finite() {
                return Err(Error::NonFinite);
            }
            if j == 1 && b != 1.0 {
                return Err(Error::InvalidBloch("b_1 must equal 1"));
            }
            if b.abs() > 1.0 + BLOCH_SLACK {
                return Err(Error::OutOfDomain {
                    what: "fixed coefficient",
                    value: b,
                });
            }
            list.push((j, b));
        }
        if !list.iter().any(|&(j, _)| j == 1) {
            list.push((1, 1.0));
        }
        list.sort_by_key(|&(j, _)| j);
        Ok(Self {
            n,
            target,
            fixed: list,
            feasible_hint: None,
        })
    }

    /// Fixes `b_1..b_{k-1}` to `prefix` and targets `b_k`.
    pub fn from_prefix(n: usize, prefix: &[f64]) -> Result<Self> {
        if prefix.first() != Some(&1.0) {
            return Err(Error::InvalidBloch("prefix must start with b_1 = 1"));
        }
        let fixed: Vec<(usize, f64)> = prefix.iter().enumerate().map(|(i, &b)| (i + 1, b)).collect();
        Self::new(n, prefix.len() + 1, &fixed)
    }

    /// Attaches a full coefficient list used as the starting point.
    pub fn with_hint(mut self, hint: Vec<f64>) -> Result<Self> {
        let total = pauli::num_coefficients(self.n);
        if hint.len() != total {
            return Err(Error::DimensionMismatch {
                expected: total,
                got: hint.len(),
            });
        }
        if !hint.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite);
        }
        self.feasible_hint = Some(hint);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn fixed(&self) -> &[(usize, f64)] {
        &self.fixed
    }

    pub fn feasible_hint(&self) -> Option<&[f64]> {
        self.feasible_hint.as_deref()
    }

    /// Free coefficients, target first, the rest ascending.
    pub fn free_indices(&self) -> Vec<usize> {
        let total = pauli::num_coefficients(self.n);
        let mut free = vec![self.target];
        free.extend(
            (2..=total).filter(|&j| j != self.target && self.fixed.binary_search_by_key(&j, |&(k, _)| k).is_err()),
        );
        free
    }

    /// `Q(x)` as a pencil in the free coefficients.
    fn pencil(&self) -> Pencil {
        let d = pauli::dim(self.n);
        let scale = 1.0 / d as f64;
        let term = |j: usize| pauli::pauli_matrix(&BasisIndex::new(self.n, j).expect("validated index")).scale(scale);
        let mut base = ComplexMatrix::zeros(d);
        for &(j, b) in &self.fixed {
            base = &base + &term(j).scale(b);
        }
        let gens = self.free_indices().into_iter().map(term).collect();
        Pencil::new(base, gens)
    }

    /// Full coefficient list with the free coefficients set to `x`.
    fn complete(&self, x: &[f64]) -> Vec<f64> {
        let mut b = vec![0.0; pauli::num_coefficients(self.n)];
        for &(j, v) in &self.fixed {
            b[j - 1] = v;
        }
        for (j, &v) in self.free_indices().iter().zip(x) {
            b[j - 1] = v;
        }
        b
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SolveStatus {
    Converged,
    /// The interval lost more than `degenerate_shrink` between the last two ε levels.
    BoundaryDegenerate,
    Infeasible,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::BoundaryDegenerate => "boundary_degenerate",
            SolveStatus::Infeasible => "infeasible",
        }
    }
}

/// Interval obtained at one regularization level.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpsilonLevel {
    pub epsilon: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundResult {
    /// NaN when infeasible.
    pub lower: f64,
    pub upper: f64,
    /// Newton steps over all stages.
    pub iterations: usize,
    pub epsilon_final: f64,
    pub status: SolveStatus,
    /// Dimension of the face the barrier ran on.
    pub face_rank: usize,
    /// Levels in configuration order.
    pub levels: Vec<EpsilonLevel>,
    /// Phase-one optimum when infeasibility was certified.
    pub infeasibility: Option<f64>,
}

impl BoundResult {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    fn infeasible(s_star: f64, iterations: usize, eps: f64) -> Self {
        Self {
            lower: f64::NAN,
            upper: f64::NAN,
            iterations,
            epsilon_final: eps,
            status: SolveStatus::Infeasible,
            face_rank: 0,
            levels: Vec::new(),
            infeasibility: Some(s_star),
        }
    }
}

/// Outcome of the feasibility search.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PhaseOne {
    /// Full coefficient list with `Q ⪰ -min_eig_slack · I`.
    Feasible {
        completion: Vec<f64>,
        min_eig: f64,
    },
    Infeasible {
        s_star: f64,
    },
}

/// Finds a completion with `Q(x) ⪰ -target·I` or certifies that the
/// smallest achievable shift exceeds `phase_one_infeasible`.
pub fn phase_one(p: &BoundProblem, cfg: &Tolerances) -> Result<PhaseOne> {
    let mut budget = Budget::new(cfg.max_newton_steps);
    let pencil = p.pencil();
    phase_one_inner(p, &pencil, cfg, &mut budget)
}

fn phase_one_inner(p: &BoundProblem, pencil: &Pencil, cfg: &Tolerances, budget: &mut Budget) -> Result<PhaseOne> {
    let (z, s) = phase_one_pencil(pencil, &vec![0.0; pencil.len()], cfg, budget)?;
    if s > cfg.phase_one_infeasible {
        return Ok(PhaseOne::Infeasible { s_star: s });
    }
    Ok(PhaseOne::Feasible {
        min_eig: min_eig_at(pencil, &z),
        completion: p.complete(&z),
    })
}

/// Lower and upper bound of the target coefficient. `cfg.sdp_tol` sets the
/// barrier gap.
pub fn solve_bounds(p: &BoundProblem, cfg: &Tolerances) -> Result<BoundResult> {
    let mut budget = Budget::new(cfg.max_newton_steps);
    let pencil = p.pencil();
    let free = p.free_indices();
    let eps_final = cfg.final_epsilon();

    let hinted = p
        .feasible_hint()
        .map(|h| free.iter().map(|&j| h[j - 1]).collect::<Vec<f64>>())
        .filter(|z| {
            let slack = if cfg.facial_reduction { cfg.psd } else { 0.5 * eps_final };
            min_eig_at(&pencil, z) > -slack
        });
    let start = match hinted {
        Some(z) => z,
        None => match phase_one_inner(p, &pencil, cfg, &mut budget)? {
            PhaseOne::Infeasible { s_star } => return Ok(BoundResult::infeasible(s_star, budget.used, eps_final)),
            PhaseOne::Feasible { completion, .. } => free.iter().map(|&j| completion[j - 1]).collect(),
        },
    };

    let face = if cfg.facial_reduction {
        match reduce(pencil, start, cfg, &mut budget) {
            Ok(Reduction::Point(v)) => return Ok(point_result(v, cfg, budget.used)),
            Ok(Reduction::Face(f)) => f,
            Err(Error::Infeasible { s_star }) => return Ok(BoundResult::infeasible(s_star, budget.used, eps_final)),
            Err(e) => return Err(e),
        }
    } else {
        Face::trivial(pencil, start)
    };
    solve_on_face(&face, cfg, &mut budget)
}

fn point_result(v: f64, cfg: &Tolerances, iterations: usize) -> BoundResult {
    BoundResult {
        lower: v,
        upper: v,
        iterations,
        epsilon_final: cfg.final_epsilon(),
        status: SolveStatus::Converged,
        face_rank: 0,
        levels: cfg
            .epsilons
            .iter()
            .map(|&epsilon| EpsilonLevel {
                epsilon,
                lower: v,
                upper: v,
            })
            .collect(),
        infeasibility: None,
    }
}

fn solve_on_face(face: &Face, cfg: &Tolerances, budget: &mut Budget) -> Result<BoundResult> {
    if cfg.epsilons.is_empty() {
        return Err(Error::InvalidOrder("no regularization levels"));
    }
    let row = face.target_row();
    let mut bounds = vec![[0.0f64; 2]; cfg.epsilons.len()];
    let mut start = face.start.clone();
    for (level, &eps) in cfg.epsilons.iter().enumerate() {
        let bar = Barrier {
            pencil: &face.pencil,
            shift: eps,
            cfg,
        };
        if !bar.feasible(&start) {
            // the face is only known to the accuracy of the looser center
            let (z, s) = phase_one_pencil(&face.pencil, &start, cfg, budget)?;
            if !bar.feasible(&z) {
                return Err(Error::NotPositiveDefinite { min_eig: -s });
            }
            start = z;
        }
        for (side, sign) in [(0, 1.0), (1, -1.0)] {
            let c: Vec<f64> = row.iter().map(|x| sign * x).collect();
            let mut z = start.clone();
            bar.minimize(&mut z, &c, cfg.t_initial, budget, |_| false)?;
            bounds[level][side] = face.target_at(&z);
        }
    }
    let mut order: Vec<usize> = (0..cfg.epsilons.len()).collect();
    order.sort_by(|&a, &b| cfg.epsilons[a].total_cmp(&cfg.epsilons[b]));
    let levels: Vec<EpsilonLevel> = cfg
        .epsilons
        .iter()
        .zip(&bounds)
        .map(|(&epsilon, b)| EpsilonLevel {
            epsilon,
            lower: b[0],
            upper: b[1],
        })
        .collect();
    let last = levels[order[0]];
    let status = match order.get(1).map(|&i| levels[i]) {
        Some(prev) if (prev.upper - prev.lower) - (last.upper - last.lower) > cfg.degenerate_shrink => {
            SolveStatus::BoundaryDegenerate
        }
        _ => SolveStatus::Converged,
    };
    // Regularization lets |b| exceed 1 by about dε; the exact problem never does.
    let lower = last.lower.clamp(-1.0, 1.0);
    Ok(BoundResult {
        lower,
        upper: last.upper.clamp(-1.0, 1.0).max(lower),
        iterations: budget.used,
        epsilon_final: last.epsilon,
        status,
        face_rank: face.pencil.dim,
        levels,
        infeasibility: None,
    })
}

#[cfg(test)]
mod tests;
