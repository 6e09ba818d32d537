//! Tolerance overrides from `--tol` and the `QIB_TOL_OVERRIDE` variable.
//!
//! Both take `key=value` pairs separated by commas or whitespace. `epsilons`
//! takes a colon-separated list such as `epsilons=1e-4:1e-6:1e-8`; booleans
//! take 0 or 1.

use qib_core::Tolerances;

use crate::error::{CliError, Result};

pub const ENV_VAR: &str = "QIB_TOL_OVERRIDE";

fn number(key: &str, text: &str) -> Result<f64> {
    text.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("tolerance {key}: {text:?} is not a number")))
}

/// Applies one override string to `tol`.
pub fn apply(tol: &mut Tolerances, spec: &str) -> Result<()> {
    for pair in spec
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|p| !p.is_empty())
    {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("tolerance override {pair:?} is not key=value")))?;
        let key = key.trim();
        if key == "epsilons" {
            let levels = value.split(':').map(|v| number(key, v)).collect::<Result<Vec<f64>>>()?;
            if levels.is_empty() || levels.iter().any(|&e| e.is_nan() || e <= 0.0) {
                return Err(CliError::Usage("epsilons must be positive".into()));
            }
            tol.epsilons = levels;
        } else {
            tol.set(key, number(key, value)?)
                .map_err(|_| CliError::Usage(format!("unknown or invalid tolerance {key}={value}")))?;
        }
    }
    Ok(())
}

/// Defaults, then the environment override, then each `--tol` in order.
pub fn resolve(env: Option<&str>, flags: &[String]) -> Result<Tolerances> {
    let mut tol = Tolerances::default();
    for spec in env.into_iter().chain(flags.iter().map(String::as_str)) {
        apply(&mut tol, spec)?;
    }
    Ok(tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_environment() {
        let tol = resolve(Some("delta_det=1e-5 sdp_tol=1e-7"), &["delta_det=1e-4".into()]).unwrap();
        assert_eq!(tol.delta_det, 1e-4);
        assert_eq!(tol.sdp_tol, 1e-7);
    }

    #[test]
    fn epsilon_lists() {
        let tol = resolve(None, &["epsilons=1e-3:1e-5,facial_reduction=0".into()]).unwrap();
        assert_eq!(tol.epsilons, vec![1e-3, 1e-5]);
        assert!(!tol.facial_reduction);
        assert!(resolve(None, &["epsilons=0".into()]).is_err());
    }

    #[test]
    fn rejects_garbage() {
        assert!(resolve(None, &["sdp_tol".into()]).is_err());
        assert!(resolve(None, &["nope=1".into()]).is_err());
        assert!(resolve(None, &["psd=abc".into()]).is_err());
        assert!(resolve(None, &["psd=-1".into()]).is_err());
    }
}
