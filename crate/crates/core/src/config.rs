//! Numerical tolerances shared by every module.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// All tolerances in one record. `Default` gives the documented values.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default))]
pub struct Tolerances {
    /// Path following stops once `dim / t` drops below this gap.
    pub sdp_tol: f64,
    /// Regularization levels `Q(x) + εI ⪰ 0`, largest first; the last one is reported.
    pub epsilons: Vec<f64>,
    pub armijo: f64,
    pub backtrack: f64,
    pub t_initial: f64,
    pub t_growth: f64,
    /// Newton steps allowed for one bound problem, all solves included.
    pub max_newton_steps: usize,
    /// Width loss between the last two ε levels that flags a boundary-degenerate interval.
    pub degenerate_shrink: f64,
    /// Phase-one optimum above this certifies infeasibility.
    pub phase_one_infeasible: f64,
    /// Phase-one stops once `Q(x) ⪰ -target·I`.
    pub phase_one_target: f64,
    /// Restrict each bound problem to the minimal face of the PSD cone before the barrier solves.
    pub facial_reduction: bool,
    /// Eigenvalues of the regularized analytic center above this value are never kernel.
    pub face_threshold: f64,
    /// A center eigenvalue is kernel when it drops below this fraction of its
    /// value at a 10⁴ times larger regularization.
    pub face_shrink: f64,
    /// Smaller of the two regularizations used while locating analytic centers.
    pub center_epsilon: f64,
    /// Intervals narrower than this are treated as determined.
    pub delta_det: f64,
    /// A reference with `1 - h^2` below this contributes nothing.
    pub reference_guard: f64,
    /// Smallest eigenvalue accepted for an input state.
    pub psd: f64,
    pub trace: f64,
    pub hermitian: f64,
    pub bloch_imag: f64,
    /// Slack in the experiment check `posterior_total <= n + bound_slack`.
    pub bound_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            sdp_tol: 1e-8,
            epsilons: vec![1e-4, 1e-6, 1e-8],
            armijo: 0.01,
            backtrack: 0.5,
            t_initial: 1.0,
            t_growth: 10.0,
            max_newton_steps: 500,
            degenerate_shrink: 1e-3,
            phase_one_infeasible: 1e-7,
            phase_one_target: 1e-9,
            facial_reduction: true,
            face_threshold: 1e-3,
            face_shrink: 0.25,
            center_epsilon: 1e-10,
            delta_det: 1e-6,
            reference_guard: 1e-12,
            psd: 1e-8,
            trace: 1e-10,
            hermitian: 1e-12,
            bloch_imag: 1e-10,
            bound_slack: 1e-3,
        }
    }
}

impl Tolerances {
    /// Names accepted by [`Tolerances::set`].
    pub const KEYS: &'static [&'static str] = &[
        "sdp_tol",
        "armijo",
        "backtrack",
        "t_initial",
        "t_growth",
        "max_newton_steps",
        "degenerate_shrink",
        "phase_one_infeasible",
        "phase_one_target",
        "facial_reduction",
        "face_threshold",
        "face_shrink",
        "center_epsilon",
        "delta_det",
        "reference_guard",
        "psd",
        "trace",
        "hermitian",
        "bloch_imag",
        "bound_slack",
    ];

    /// Overrides one scalar field by name. Booleans take 0 or 1.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::OutOfDomain {
                what: "tolerance",
                value,
            });
        }
        match key {
            "sdp_tol" => self.sdp_tol = value,
            "armijo" => self.armijo = value,
            "backtrack" => self.backtrack = value,
            "t_initial" => self.t_initial = value,
            "t_growth" => self.t_growth = value,
            "max_newton_steps" => self.max_newton_steps = value as usize,
            "degenerate_shrink" => self.degenerate_shrink = value,
            "phase_one_infeasible" => self.phase_one_infeasible = value,
            "phase_one_target" => self.phase_one_target = value,
            "facial_reduction" => self.facial_reduction = value != 0.0,
            "face_threshold" => self.face_threshold = value,
            "face_shrink" => self.face_shrink = value,
            "center_epsilon" => self.center_epsilon = value,
            "delta_det" => self.delta_det = value,
            "reference_guard" => self.reference_guard = value,
            "psd" => self.psd = value,
            "trace" => self.trace = value,
            "hermitian" => self.hermitian = value,
            "bloch_imag" => self.bloch_imag = value,
            "bound_slack" => self.bound_slack = value,
            _ => {
                return Err(Error::OutOfDomain {
                    what: "unknown tolerance key",
                    value,
                })
            }
        }
        Ok(())
    }

    /// Smallest regularization level.
    pub fn final_epsilon(&self) -> f64 {
        self.epsilons.iter().copied().fold(f64::INFINITY, f64::min)
    }
}
