//! File formats, batch experiments and the command-line front end for
//! `qib-core`.

pub mod cli;
pub mod error;
pub mod experiment;
pub mod formats;
pub mod svg;
pub mod tol;

pub use error::{CliError, Result};
