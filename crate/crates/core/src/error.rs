use thiserror::Error;

/// Errors raised by the core numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },
    #[error("matrix is not positive definite (min eigenvalue {min_eig:e})")]
    NotPositiveDefinite { min_eig: f64 },
    #[error("input contains non-finite values")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("qubit count {n} outside supported range 1..={max}")]
    QubitCount { n: usize, max: usize },
    #[error("basis index {j} out of range for {n} qubits")]
    IndexOutOfRange { j: usize, n: usize },
    #[error("invalid Bloch vector: {0}")]
    InvalidBloch(&'static str),
    #[error("trace {trace} differs from 1")]
    TraceNotOne { trace: f64 },
    #[error("state is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },
    #[error("imaginary residue {residue:e} in coefficient {j}")]
    ImaginaryResidue { j: usize, residue: f64 },
    #[error("degenerate reference h = {h}")]
    DegenerateReference { h: f64 },
    #[error("{what} = {value} outside its domain")]
    OutOfDomain { what: &'static str, value: f64 },
    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("rank {rank} invalid for dimension {dim}")]
    InvalidRank { rank: usize, dim: usize },
    #[error("family {family} requires {requirement}")]
    InvalidFamily {
        family: &'static str,
        requirement: &'static str,
    },
    #[error("infeasible prefix (phase-one optimum {s_star:e})")]
    Infeasible { s_star: f64 },
    #[error("infeasible bound problem at index {j}")]
    InfeasibleAt { j: usize },
    #[error("barrier method did not converge after {iterations} Newton steps (gap {gap:e})")]
    NoConvergence { iterations: usize, gap: f64 },
    #[error("grid oracle supports at most 3 free variables, got {0}")]
    TooManyFreeVariables(usize),
    #[error("special case: {0} vanishes, closed form does not apply")]
    SpecialCase(&'static str),
    #[error("invalid ordering: {0}")]
    InvalidOrder(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
