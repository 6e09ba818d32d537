//! Posterior chi-squared information content of multi-qubit states.
//!
//! A state is written in the tensor-product Pauli basis and its coefficients
//! are revealed one at a time. Before each reveal, the feasible interval of
//! the next coefficient given the earlier ones comes from a pair of small
//! semidefinite programs ([`sdp::solve_bounds`]); the coefficient then
//! contributes the chi-squared divergence from the interval midpoint.
//! [`posterior::posterior_info`] sums those contributions.
//!
//! The crate is `no_std` with `alloc`. File formats, batch runs and the
//! command-line tool live in the companion `qib` crate.
//!
//! ```
//! use qib_core::posterior::posterior_info;
//! use qib_core::states::bell_state;
//! use qib_core::pauli::DensityMatrix;
//! use qib_core::Tolerances;
//!
//! let rho = DensityMatrix::from_statevector(2, &bell_state(0)).unwrap();
//! let report = posterior_info(&rho, None, &Tolerances::default()).unwrap();
//! assert!((report.posterior_total - 2.0).abs() < 1e-6);
//! ```

#![no_std]
#![forbid(unsafe_code)]
// `!(x < y)` checks deliberately reject NaN; index loops mirror the triangular solves
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod analytic2q;
pub mod config;
pub mod divergence;
mod error;
pub mod linalg;
pub mod pauli;
pub mod posterior;
pub mod sdp;
pub mod states;

pub use config::Tolerances;
pub use error::{Error, Result};
