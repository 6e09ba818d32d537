//! Restriction of a pencil to the minimal face of the PSD cone containing its
//! feasible set.
//!
//! Prefixes taken from pure states leave no strictly feasible completion, so
//! the barrier would see an empty interior. Analytic centers of
//! `W(z) + sI ⪰ 0` at two shifts `s` far apart expose the common kernel `V`
//! of all feasible matrices: its eigenvalues follow `s` toward zero while
//! the others settle at positive limits. Every feasible `W(z)` then
//! satisfies `W(z)V = 0`, which is linear in `z`; solving it and compressing
//! onto `V⊥` gives a smaller pencil that is again checked for a kernel.

use alloc::vec;
use alloc::vec::Vec;

use super::barrier::{dot, Barrier, Budget, Pencil};
use crate::config::Tolerances;
use crate::linalg::{eigh_unchecked, sym_eigen, ComplexMatrix, SymMatrix, C64};
use crate::{Error, Result};

/// Relative squared singular value below which a kernel equation is dependent.
const RANK_TOL: f64 = 1e-10;
/// Residual of the kernel equations above which a reduction is rejected.
const CONSISTENCY_TOL: f64 = 1e-5;
/// Row norm below which the target no longer depends on the free variables.
const DETERMINED_TOL: f64 = 1e-12;

/// The free variables written as `x = origin + Σ z_k basis_k`, with the
/// compressed pencil in `z` and a strictly feasible `z`.
#[derive(Clone, Debug)]
pub(crate) struct Face {
    pub pencil: Pencil,
    pub origin: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
    pub start: Vec<f64>,
}

impl Face {
    pub fn trivial(pencil: Pencil, start: Vec<f64>) -> Self {
        let m = pencil.len();
        let basis = (0..m)
            .map(|i| {
                let mut e = vec![0.0; m];
                e[i] = 1.0;
                e
            })
            .collect();
        Self {
            pencil,
            origin: vec![0.0; m],
            basis,
            start,
        }
    }

    /// Gradient of the first free variable (the target) in `z`.
    pub fn target_row(&self) -> Vec<f64> {
        self.basis.iter().map(|col| col[0]).collect()
    }

    pub fn target_at(&self, z: &[f64]) -> f64 {
        self.origin[0] + dot(&self.target_row(), z)
    }

    /// Full free-variable vector for the face coordinates `z`.
    pub fn lift(&self, z: &[f64]) -> Vec<f64> {
        let mut x = self.origin.clone();
        for (col, &zi) in self.basis.iter().zip(z) {
            for (xi, ci) in x.iter_mut().zip(col) {
                *xi += zi * ci;
            }
        }
        x
    }
}

pub(crate) enum Reduction {
    /// The target takes a single value on the feasible set.
    Point(f64),
    Face(Face),
}

/// Smallest eigenvalue of `W(z)`.
pub(crate) fn min_eig_at(p: &Pencil, z: &[f64]) -> f64 {
    eigh_unchecked(&p.at(z)).values[0]
}

/// Minimizes `s` subject to `W(z) + sI ⪰ 0` from `z0`, stopping as soon as
/// `s <= cfg.phase_one_target`. Returns the final `(z, s)`.
pub(crate) fn phase_one_pencil(
    p: &Pencil,
    z0: &[f64],
    cfg: &Tolerances,
    budget: &mut Budget,
) -> Result<(Vec<f64>, f64)> {
    let aug = p.with_identity();
    let m = p.len();
    let mut w = z0.to_vec();
    w.push(1.0 + min_eig_at(p, z0).abs());
    let mut c = vec![0.0; m + 1];
    c[m] = 1.0;
    let bar = Barrier {
        pencil: &aug,
        shift: 0.0,
        cfg,
    };
    let target = cfg.phase_one_target;
    bar.minimize(&mut w, &c, cfg.t_initial, budget, |w| w[m] <= target)?;
    let s = w.pop().unwrap_or(0.0);
    Ok((w, s))
}

/// Ratio between the two centering shifts used to tell kernel directions
/// (whose eigenvalues follow the shift down) from the rest.
const SHIFT_SPREAD: f64 = 1e4;

/// Iterates kernel detection and compression until no eigenvalue of the
/// center shrinks with the regularization.
pub(crate) fn reduce(pencil: Pencil, start: Vec<f64>, cfg: &Tolerances, budget: &mut Budget) -> Result<Reduction> {
    let mut face = Face::trivial(pencil, start);
    loop {
        let row = face.target_row();
        if face.basis.is_empty() || libm::sqrt(dot(&row, &row)) <= DETERMINED_TOL {
            return Ok(Reduction::Point(face.target_at(&face.start)));
        }
        let me = min_eig_at(&face.pencil, &face.start);
        let tight = if me > -0.5 * cfg.center_epsilon {
            cfg.center_epsilon
        } else if -me <= cfg.psd {
            2.0 * -me
        } else {
            let (z, s) = phase_one_pencil(&face.pencil, &face.start, cfg, budget)?;
            if s > cfg.phase_one_infeasible {
                return Err(Error::Infeasible { s_star: s });
            }
            face.start = z;
            cfg.center_epsilon.max(2.0 * s)
        };
        let m = face.pencil.len();
        let zero = vec![0.0; m];
        let centre = |shift: f64, z: &mut [f64], budget: &mut Budget| {
            Barrier {
                pencil: &face.pencil,
                shift,
                cfg,
            }
            .centre(z, &zero, 0.0, budget)
        };
        let mut z_tight = face.start.clone();
        centre(tight, &mut z_tight, budget)?;
        let mut z_loose = z_tight.clone();
        centre(tight * SHIFT_SPREAD, &mut z_loose, budget)?;

        let eig = eigh_unchecked(&face.pencil.at(&z_tight));
        let loose = eigh_unchecked(&face.pencil.at(&z_loose)).values;
        let r = face.pencil.dim;
        // compare eigenvalues of W + sI, which stay positive at both centers
        let q = eig
            .values
            .iter()
            .zip(&loose)
            .take_while(|&(&v, &w)| {
                v <= cfg.face_threshold && v + tight <= cfg.face_shrink * (w + tight * SHIFT_SPREAD)
            })
            .count();
        if q == 0 {
            face.start = z_loose;
            return Ok(Reduction::Face(face));
        }
        if q == r {
            return Err(Error::Infeasible {
                s_star: -eig.values[r - 1],
            });
        }
        face.start = z_tight;
        let kernel: Vec<Vec<C64>> = (0..q).map(|i| eig.vector(i)).collect();
        let range: Vec<Vec<C64>> = (q..r).map(|i| eig.vector(i)).collect();
        match compress(&face, &kernel, &range) {
            Some(next) => face = next,
            None => {
                face.start = z_loose;
                return Ok(Reduction::Face(face));
            }
        }
    }
}

fn apply(m: &ComplexMatrix, v: &[C64]) -> Vec<C64> {
    m.mul_vec(v)
}

/// `P† A P` for the orthonormal columns `P`.
fn compress_matrix(a: &ComplexMatrix, cols: &[Vec<C64>]) -> ComplexMatrix {
    let av: Vec<Vec<C64>> = cols.iter().map(|v| apply(a, v)).collect();
    let out = ComplexMatrix::from_fn(cols.len(), |i, j| {
        cols[i].iter().zip(&av[j]).map(|(x, y)| x.conj() * y).sum()
    });
    out.hermitian_part()
}

/// Solves `W(z)V = 0` and compresses onto `range`. `None` when the
/// equations are inconsistent at the tolerance of the kernel estimate.
fn compress(face: &Face, kernel: &[Vec<C64>], range: &[Vec<C64>]) -> Option<Face> {
    let p = &face.pencil;
    let m = p.len();
    // one real equation per real and imaginary part of each entry of W(z)V
    let flatten = |mat: &ComplexMatrix| -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * p.dim * kernel.len());
        for v in kernel {
            for x in apply(mat, v) {
                out.push(x.re);
                out.push(x.im);
            }
        }
        out
    };
    let rhs: Vec<f64> = flatten(&p.base).into_iter().map(|x| -x).collect();
    let cols: Vec<Vec<f64>> = p.gens.iter().map(flatten).collect();

    let gram = SymMatrix::from_fn(m, |i, j| dot(&cols[i], &cols[j]));
    let (values, vectors) = sym_eigen(&gram);
    let top = values.last().copied().unwrap_or(0.0).max(0.0);
    let threshold = RANK_TOL * top;
    let residual_at = |z: &[f64]| -> Vec<f64> {
        let mut res: Vec<f64> = rhs.iter().map(|x| -x).collect();
        for (col, &zi) in cols.iter().zip(z) {
            for (ri, ci) in res.iter_mut().zip(col) {
                *ri += zi * ci;
            }
        }
        res
    };
    // least-squares projection of the current center onto the solution set
    let res = residual_at(&face.start);
    let etr: Vec<f64> = (0..m).map(|i| dot(&cols[i], &res)).collect();
    let mut zp = face.start.clone();
    let mut null = Vec::new();
    for (k, &lam) in values.iter().enumerate() {
        let v: Vec<f64> = (0..m).map(|i| vectors[(i, k)]).collect();
        if lam <= threshold {
            null.push(v);
        } else {
            let coef = dot(&v, &etr) / lam;
            for (zi, vi) in zp.iter_mut().zip(&v) {
                *zi -= coef * vi;
            }
        }
    }
    let res = residual_at(&zp);
    if libm::sqrt(dot(&res, &res)) > CONSISTENCY_TOL {
        return None;
    }

    let origin = face.lift(&zp);
    let basis: Vec<Vec<f64>> = null
        .iter()
        .map(|v| {
            let mut col = vec![0.0; face.origin.len()];
            for (b, &vi) in face.basis.iter().zip(v) {
                for (c, bi) in col.iter_mut().zip(b) {
                    *c += vi * bi;
                }
            }
            col
        })
        .collect();
    let base = compress_matrix(&p.at(&zp), range);
    let gens = null.iter().map(|v| compress_matrix(&p.combine(v), range)).collect();
    let start = vec![0.0; null.len()];
    Some(Face {
        pencil: Pencil::new(base, gens),
        origin,
        basis,
        start,
    })
}
