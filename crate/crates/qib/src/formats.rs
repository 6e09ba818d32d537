//! JSON state files and permutation files.
//!
//! A state file is `{"n": 2, "kind": "bloch" | "statevector" | "density", "data": [...]}`:
//! Bloch data is a flat real list of `4^n` coefficients in natural order,
//! the other kinds are lists of `[re, im]` pairs (`2^n` amplitudes, or the
//! `4^n` density entries row by row).

use std::fs;
use std::path::Path;

use qib_core::linalg::{ComplexMatrix, C64};
use qib_core::pauli::{dim, num_coefficients, BasisOrder, BlochVector, DensityMatrix};
use qib_core::Tolerances;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Bloch,
    Statevector,
    Density,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateData {
    Real(Vec<f64>),
    Complex(Vec<[f64; 2]>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub n: usize,
    pub kind: StateKind,
    pub data: StateData,
}

fn complex(data: &[[f64; 2]]) -> Vec<C64> {
    data.iter().map(|&[re, im]| C64::new(re, im)).collect()
}

fn expect_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(CliError::Format(format!("{what}: expected {want} entries, got {got}")))
    }
}

impl StateFile {
    pub fn bloch(v: &BlochVector) -> Self {
        Self {
            n: v.n(),
            kind: StateKind::Bloch,
            data: StateData::Real(v.as_slice().to_vec()),
        }
    }

    pub fn statevector(n: usize, psi: &[C64]) -> Self {
        Self {
            n,
            kind: StateKind::Statevector,
            data: StateData::Complex(psi.iter().map(|z| [z.re, z.im]).collect()),
        }
    }

    pub fn density(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        let d = m.dim();
        let data = (0..d * d).map(|k| m[(k / d, k % d)]).map(|z| [z.re, z.im]).collect();
        Self {
            n: rho.n(),
            kind: StateKind::Density,
            data: StateData::Complex(data),
        }
    }

    /// Validated density matrix, with the trace, Hermiticity and PSD
    /// tolerances taken from `tol`.
    pub fn to_density(&self, tol: &Tolerances) -> Result<DensityMatrix> {
        let n = self.n;
        if n == 0 || n > qib_core::pauli::MAX_QUBITS {
            return Err(qib_core::Error::QubitCount {
                n,
                max: qib_core::pauli::MAX_QUBITS,
            }
            .into());
        }
        let rho = match (self.kind, &self.data) {
            (StateKind::Bloch, StateData::Real(b)) => {
                expect_len("bloch data", b.len(), num_coefficients(n))?;
                let v = BlochVector::new(n, b.clone())?;
                let m = qib_core::pauli::density_from_bloch(&v);
                DensityMatrix::with_tolerances(n, m, tol.trace, tol.hermitian, tol.psd)?
            }
            (StateKind::Statevector, StateData::Complex(amps)) => {
                expect_len("statevector data", amps.len(), dim(n))?;
                DensityMatrix::from_statevector(n, &complex(amps))?
            }
            (StateKind::Density, StateData::Complex(entries)) => {
                let d = dim(n);
                expect_len("density data", entries.len(), d * d)?;
                let m = ComplexMatrix::from_vec(d, complex(entries))?;
                DensityMatrix::with_tolerances(n, m, tol.trace, tol.hermitian, tol.psd)?
            }
            // an empty list parses as real data
            (_, StateData::Real(v)) if v.is_empty() => {
                return Err(CliError::Format(format!("{:?} data is empty", self.kind)));
            }
            (kind, _) => {
                return Err(CliError::Format(format!("data does not match kind {kind:?}")));
            }
        };
        Ok(rho)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| CliError::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("state files always serialize");
        fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
    }
}

/// `natural`, `base4`, or a path to a file listing natural indices separated
/// by whitespace or commas (an optional leading 1 is accepted).
pub fn resolve_order(arg: &str, n: usize) -> Result<Option<Vec<usize>>> {
    match arg {
        "natural" => Ok(None),
        "base4" => Ok(Some(BasisOrder::Base4.sequence(n)?)),
        path => {
            let path = Path::new(path);
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let order = parse_order(&text)?;
            qib_core::posterior::validate_order(n, &order)?;
            Ok(Some(order))
        }
    }
}

pub fn parse_order(text: &str) -> Result<Vec<usize>> {
    text.split(|c: char| c.is_whitespace() || c == ',' || c == '[' || c == ']')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| CliError::Format(format!("order entry {t:?} is not an index")))
        })
        .collect()
}
