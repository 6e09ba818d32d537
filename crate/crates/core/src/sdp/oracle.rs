//! Exhaustive grid search over the free coefficients, used to certify the
//! barrier bounds from inside.

use alloc::vec;
use alloc::vec::Vec;

use super::BoundProblem;
use crate::linalg::eigvalsh_unchecked;
use crate::{Error, Result};

/// Most free coefficients the grid accepts.
pub const GRID_MAX_FREE: usize = 3;
/// Smallest eigenvalue accepted as PSD on the grid.
const GRID_PSD_TOL: f64 = 1e-10;

/// Hull of the target values over PSD grid points `(2i - s)/s`,
/// `i = 0..=s`, for every free coefficient. `None` when no grid point is PSD.
/// The hull is an inner approximation of the true interval.
pub fn grid_oracle(p: &BoundProblem, grid_steps: usize) -> Result<Option<(f64, f64)>> {
    grid_oracle_pinned(p, grid_steps, &[])
}

/// Like [`grid_oracle`] with some free coefficients held at given values,
/// which keeps the result an inner approximation.
pub fn grid_oracle_pinned(p: &BoundProblem, grid_steps: usize, pins: &[(usize, f64)]) -> Result<Option<(f64, f64)>> {
    if grid_steps == 0 {
        return Err(Error::OutOfDomain {
            what: "grid_steps",
            value: 0.0,
        });
    }
    let free = p.free_indices();
    let mut pinned = vec![None; free.len()];
    for &(j, v) in pins {
        match free.iter().position(|&f| f == j) {
            Some(0) | None => return Err(Error::InvalidOrder("pins must name free non-target coefficients")),
            Some(pos) => pinned[pos] = Some(v),
        }
    }
    let gridded: Vec<usize> = (0..free.len()).filter(|&i| pinned[i].is_none()).collect();
    if gridded.len() > GRID_MAX_FREE {
        return Err(Error::TooManyFreeVariables(gridded.len()));
    }
    let pencil = p.pencil();
    let s = grid_steps as i64;
    let value = |i: i64| (2 * i - s) as f64 / s as f64;
    let mut x: Vec<f64> = pinned.iter().map(|v| v.unwrap_or(0.0)).collect();
    let mut counter = vec![0i64; gridded.len()];
    let mut hull: Option<(f64, f64)> = None;
    loop {
        for (&slot, &i) in gridded.iter().zip(&counter) {
            x[slot] = value(i);
        }
        if eigvalsh_unchecked(&pencil.at(&x))[0] >= -GRID_PSD_TOL {
            let b = x[0];
            hull = Some(match hull {
                Some((lo, hi)) => (lo.min(b), hi.max(b)),
                None => (b, b),
            });
        }
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == counter.len() {
                return Ok(hull);
            }
            counter[pos] += 1;
            if counter[pos] <= s {
                break;
            }
            counter[pos] = 0;
            pos += 1;
        }
    }
}
