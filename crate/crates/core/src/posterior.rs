//! Coefficient-by-coefficient posterior information of a state.
//!
//! The walk visits the coefficients in a chosen order. Each step fixes every
//! visited coefficient to its true value, bounds the next one over all
//! completions, takes the interval midpoint as the reference and charges the
//! χ² divergence of the true value against it.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::config::Tolerances;
use crate::divergence::{chi2_bloch, prior_info};
use crate::pauli::{num_coefficients, BasisOrder, DensityMatrix};
use crate::sdp::{solve_bounds, BoundProblem, SolveStatus};
use crate::states::StateSpec;
use crate::{Error, Result};

/// Bounds and contribution of one coefficient.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParamInterval {
    pub index: usize,
    pub lower: f64,
    pub upper: f64,
    /// Interval midpoint.
    pub reference: f64,
    /// True coefficient of the state.
    pub value: f64,
    pub contribution: f64,
    /// Width below `delta_det`; contributes nothing.
    pub degenerate: bool,
    pub status: SolveStatus,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InfoReport {
    pub spec: Option<StateSpec>,
    pub n: usize,
    /// In visiting order.
    pub intervals: Vec<ParamInterval>,
    pub posterior_total: f64,
    pub prior_total: f64,
    pub total_iterations: usize,
    pub max_iterations: usize,
    /// `BoundaryDegenerate` when any step was flagged.
    pub worst_status: SolveStatus,
    /// `natural`, `base4` or `custom`.
    pub order_id: String,
}

impl InfoReport {
    pub fn max_contribution(&self) -> f64 {
        self.intervals.iter().map(|p| p.contribution).fold(0.0, f64::max)
    }

    pub fn num_degenerate(&self) -> usize {
        self.intervals.iter().filter(|p| p.degenerate).count()
    }

    pub fn interval(&self, index: usize) -> Option<&ParamInterval> {
        self.intervals.iter().find(|p| p.index == index)
    }
}

/// Checks that `order` lists `2..=4^n` once each, optionally led by 1, and
/// drops the leading 1.
pub fn validate_order(n: usize, order: &[usize]) -> Result<Vec<usize>> {
    let total = num_coefficients(n);
    let body = match order.first() {
        Some(1) => &order[1..],
        _ => order,
    };
    if body.len() != total - 1 {
        return Err(Error::InvalidOrder(
            "order must list every coefficient after the first exactly once",
        ));
    }
    let mut seen = vec![false; total + 1];
    for &j in body {
        if j < 2 || j > total || seen[j] {
            return Err(Error::InvalidOrder(
                "order must list every coefficient after the first exactly once",
            ));
        }
        seen[j] = true;
    }
    Ok(body.to_vec())
}

fn order_id(n: usize, order: &[usize]) -> String {
    for named in [BasisOrder::Natural, BasisOrder::Base4] {
        if let Ok(seq) = named.sequence(n) {
            if seq[1..] == *order {
                return named.id().into();
            }
        }
    }
    "custom".into()
}

/// Contribution of the true value `b` given the solved interval, or `None`
/// for a determined coefficient.
pub fn contribution(b: f64, lower: f64, upper: f64, cfg: &Tolerances) -> Result<Option<f64>> {
    if upper - lower < cfg.delta_det {
        return Ok(None);
    }
    let h = 0.5 * (lower + upper);
    if 1.0 - h * h < cfg.reference_guard {
        return Ok(Some(0.0));
    }
    chi2_bloch(b.clamp(lower, upper), h).map(Some)
}

/// Walks the coefficients of `rho` in `order` (natural order when `None`).
pub fn posterior_info(rho: &DensityMatrix, order: Option<&[usize]>, cfg: &Tolerances) -> Result<InfoReport> {
    posterior_info_upto(rho, order, cfg, None)
}

/// Like [`posterior_info`], stopping once coefficient `upto` has been
/// visited. Totals cover the visited coefficients only.
pub fn posterior_info_upto(
    rho: &DensityMatrix,
    order: Option<&[usize]>,
    cfg: &Tolerances,
    upto: Option<usize>,
) -> Result<InfoReport> {
    let n = rho.n();
    let mut order = match order {
        Some(o) => validate_order(n, o)?,
        None => (2..=num_coefficients(n)).collect(),
    };
    let id = order_id(n, &order);
    if let Some(last) = upto {
        match order.iter().position(|&j| j == last) {
            Some(pos) => order.truncate(pos + 1),
            None => return Err(Error::IndexOutOfRange { j: last, n }),
        }
    }
    let bloch = rho.bloch();
    let b = bloch.as_slice();

    let mut fixed: Vec<(usize, f64)> = vec![(1, 1.0)];
    let mut intervals = Vec::with_capacity(order.len());
    for &j in &order {
        let problem = BoundProblem::new(n, j, &fixed)?.with_hint(b.to_vec())?;
        let res = solve_bounds(&problem, cfg).map_err(|e| match e {
            Error::Infeasible { .. } => Error::InfeasibleAt { j },
            other => other,
        })?;
        if res.status == SolveStatus::Infeasible {
            return Err(Error::InfeasibleAt { j });
        }
        let value = b[j - 1];
        let found = contribution(value, res.lower, res.upper, cfg)?;
        intervals.push(ParamInterval {
            index: j,
            lower: res.lower,
            upper: res.upper,
            reference: 0.5 * (res.lower + res.upper),
            value,
            contribution: found.unwrap_or(0.0),
            degenerate: found.is_none(),
            status: res.status,
            iterations: res.iterations,
        });
        fixed.push((j, value));
    }

    let worst_status = if intervals.iter().any(|p| p.status == SolveStatus::BoundaryDegenerate) {
        SolveStatus::BoundaryDegenerate
    } else {
        SolveStatus::Converged
    };
    Ok(InfoReport {
        spec: None,
        n,
        posterior_total: intervals.iter().map(|p| p.contribution).sum(),
        prior_total: prior_info(&bloch),
        total_iterations: intervals.iter().map(|p| p.iterations).sum(),
        max_iterations: intervals.iter().map(|p| p.iterations).max().unwrap_or(0),
        worst_status,
        order_id: id,
        intervals,
    })
}

/// Generates and walks one state.
pub fn posterior_info_spec(spec: &StateSpec, order: Option<&[usize]>, cfg: &Tolerances) -> Result<InfoReport> {
    let rho = spec.generate()?;
    let mut report = posterior_info(&rho, order, cfg)?;
    report.spec = Some(spec.clone());
    Ok(report)
}

/// One result per spec, in input order; a failing spec does not stop the rest.
pub fn posterior_info_batch(specs: &[StateSpec], cfg: &Tolerances) -> Vec<Result<InfoReport>> {
    specs.iter().map(|s| posterior_info_spec(s, None, cfg)).collect()
}
