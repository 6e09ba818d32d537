use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    /// Bad input or a violated result invariant.
    pub const INVARIANT: i32 = 2;
    pub const IO: i32 = 3;
    pub const SOLVER: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: malformed JSON: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Format(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] qib_core::Error),
    #[error("{count} state(s) exceed posterior_total <= n + {slack}")]
    Violation { count: usize, slack: f64 },
    #[error("{0} state(s) failed")]
    Failed(usize),
    #[error("divergence axioms fail for the chi-squared row")]
    AxiomsFailed,
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use qib_core::Error as E;
        match self {
            CliError::Io { .. } | CliError::Json { .. } | CliError::Csv(_) => exit::IO,
            CliError::Format(_) | CliError::Usage(_) | CliError::Violation { .. } | CliError::AxiomsFailed => {
                exit::INVARIANT
            }
            CliError::Failed(_) => exit::SOLVER,
            CliError::Core(e) => match e {
                E::Infeasible { .. }
                | E::InfeasibleAt { .. }
                | E::NoConvergence { .. }
                | E::NotPositiveDefinite { .. } => exit::SOLVER,
                _ => exit::INVARIANT,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
