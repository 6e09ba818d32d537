//! Log-barrier Newton machinery for affine Hermitian pencils
//! `W(z) = W0 + Σ z_i G_i`.
//!
//! The Newton system for `f(z) = t cᵀz - log det(W(z) + sI)` is formed in the
//! whitened frame `Ĝ_i = L⁻¹ G_i L⁻†` with `W + sI = LL†`. Packing each `Ĝ_i`
//! into a real vector of length `r²` gives a matrix `M` with Hessian `MMᵀ`, so
//! a QR factorization of `Mᵀ` yields the step without squaring the condition
//! number.

use alloc::vec;
use alloc::vec::Vec;

use crate::config::Tolerances;
use crate::linalg::{cholesky_in_place, eigvalsh_unchecked, solve_sym, ComplexMatrix, SymMatrix};
use crate::{Error, Result};

/// Newton decrement `λ²/2` below which a point counts as centered.
const NEWTON_TOL: f64 = 1e-10;
/// Largest fraction of the distance to the boundary taken in one step.
const FRACTION_TO_BOUNDARY: f64 = 0.99;
const MAX_BACKTRACKS: usize = 60;
/// Newton steps after which a centering pass gives up refining.
const MAX_CENTERING_STEPS: usize = 60;
/// Relative size of a QR pivot below which the normal equations take over.
const QR_PIVOT_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
pub(crate) struct Pencil {
    pub dim: usize,
    pub base: ComplexMatrix,
    pub gens: Vec<ComplexMatrix>,
}

impl Pencil {
    pub fn new(base: ComplexMatrix, gens: Vec<ComplexMatrix>) -> Self {
        Self {
            dim: base.dim(),
            base,
            gens,
        }
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    /// `Σ w_i G_i`.
    pub fn combine(&self, w: &[f64]) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim);
        for (g, &wi) in self.gens.iter().zip(w) {
            if wi != 0.0 {
                for (o, x) in out.as_mut_slice().iter_mut().zip(g.as_slice()) {
                    *o += x * wi;
                }
            }
        }
        out
    }

    pub fn at(&self, z: &[f64]) -> ComplexMatrix {
        &self.base + &self.combine(z)
    }

    /// The pencil with one extra variable multiplying the identity.
    pub fn with_identity(&self) -> Self {
        let mut gens = self.gens.clone();
        gens.push(ComplexMatrix::identity(self.dim));
        Self::new(self.base.clone(), gens)
    }
}

/// Newton steps shared by every solve belonging to one bound problem.
#[derive(Debug)]
pub(crate) struct Budget {
    pub used: usize,
    cap: usize,
}

impl Budget {
    pub fn new(cap: usize) -> Self {
        Self { used: 0, cap }
    }

    fn spend(&mut self, gap: f64) -> Result<()> {
        if self.used >= self.cap {
            return Err(Error::NoConvergence {
                iterations: self.used,
                gap,
            });
        }
        self.used += 1;
        Ok(())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn shifted(m: &ComplexMatrix, shift: f64) -> ComplexMatrix {
    let mut s = m.clone();
    for i in 0..s.dim() {
        s[(i, i)] += shift;
    }
    s
}

/// Lower Cholesky factor of `W(z) + shift I`, or `None` off the interior.
pub(crate) fn factor(p: &Pencil, z: &[f64], shift: f64) -> Option<ComplexMatrix> {
    let mut s = shifted(&p.at(z), shift);
    if cholesky_in_place(s.as_mut_slice(), p.dim) {
        Some(s)
    } else {
        None
    }
}

/// Solves `L X = B` for lower triangular `L`.
fn forward(l: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let n = l.dim();
    let mut x = b.clone();
    for col in 0..n {
        for i in 0..n {
            let mut s = x[(i, col)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, col)];
            }
            x[(i, col)] = s / l[(i, i)].re;
        }
    }
    x
}

/// `L⁻¹ G L⁻†`, Hermitian when `G` is.
fn whiten(l: &ComplexMatrix, g: &ComplexMatrix) -> ComplexMatrix {
    let y = forward(l, g);
    forward(l, &y.adjoint())
}

/// Real coordinates in which the Frobenius inner product of Hermitian
/// matrices is the Euclidean one.
fn pack(m: &ComplexMatrix, out: &mut [f64]) {
    let r = m.dim();
    let mut k = 0;
    for a in 0..r {
        out[k] = m[(a, a)].re;
        k += 1;
    }
    for a in 0..r {
        for b in a + 1..r {
            let v = m[(a, b)];
            out[k] = core::f64::consts::SQRT_2 * v.re;
            out[k + 1] = core::f64::consts::SQRT_2 * v.im;
            k += 2;
        }
    }
}

struct Step {
    dz: Vec<f64>,
    lambda2: f64,
    whitened: Vec<ComplexMatrix>,
}

/// Householder QR of the `rows × m` column-major matrix `a`, applying the
/// reflections to `u` as well. Returns the diagonal of `R`; the strict upper
/// triangle is left in `a`.
fn householder(a: &mut [f64], rows: usize, m: usize, u: &mut [f64]) -> Vec<f64> {
    let mut diag = vec![0.0; m];
    for j in 0..m {
        let (head, tail) = a.split_at_mut((j + 1) * rows);
        let col = &mut head[j * rows..];
        let norm = libm::sqrt(col[j..].iter().map(|x| x * x).sum::<f64>());
        if norm == 0.0 {
            continue;
        }
        let alpha = if col[j] > 0.0 { -norm } else { norm };
        col[j] -= alpha;
        let vnorm2: f64 = col[j..].iter().map(|x| x * x).sum();
        let v = &col[j..];
        let reflect = |w: &mut [f64]| {
            let s: f64 = v.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
            let f = 2.0 * s / vnorm2;
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= f * vi;
            }
        };
        for k in 0..m - j - 1 {
            reflect(&mut tail[k * rows + j..(k + 1) * rows]);
        }
        reflect(&mut u[j..rows]);
        diag[j] = alpha;
    }
    diag
}

pub(crate) struct Barrier<'a> {
    pub pencil: &'a Pencil,
    /// Regularization `s` in `W(z) + sI ≻ 0`.
    pub shift: f64,
    pub cfg: &'a Tolerances,
}

impl Barrier<'_> {
    pub fn feasible(&self, z: &[f64]) -> bool {
        factor(self.pencil, z, self.shift).is_some()
    }

    /// Newton step for `f`; with `barrier` false the log det gradient is
    /// dropped, leaving the path tangent `-H⁻¹ t c`.
    fn newton(&self, z: &[f64], c: &[f64], t: f64, barrier: bool) -> Option<Step> {
        let l = factor(self.pencil, z, self.shift)?;
        let r = self.pencil.dim;
        let rows = r * r;
        let m = self.pencil.len();
        let whitened: Vec<ComplexMatrix> = self.pencil.gens.iter().map(|g| whiten(&l, g)).collect();
        let mut a = vec![0.0; rows * m];
        for (i, w) in whitened.iter().enumerate() {
            pack(w, &mut a[i * rows..(i + 1) * rows]);
        }
        let tc: Vec<f64> = c.iter().map(|x| t * x).collect();
        let unit = if barrier { r } else { 0 };
        let (dz, lambda2) = if m <= rows {
            qr_step(a.clone(), rows, m, unit, &tc)
        } else {
            None
        }
        .or_else(|| normal_step(&a, rows, m, unit, &tc))?;
        Some(Step { dz, lambda2, whitened })
    }

    /// Minimizes `t cᵀz - log det(W(z) + sI)` from the strictly feasible `z`.
    /// Returns early once the line search stalls at rounding level.
    pub fn centre(&self, z: &mut [f64], c: &[f64], t: f64, budget: &mut Budget) -> Result<()> {
        let gap = self.pencil.dim as f64 / t;
        for _ in 0..MAX_CENTERING_STEPS {
            let step = self.newton(z, c, t, true).ok_or(Error::NonFinite)?;
            if !(step.lambda2.is_finite()) {
                return Err(Error::NonFinite);
            }
            if step.lambda2 / 2.0 <= NEWTON_TOL {
                return Ok(());
            }
            budget.spend(gap)?;
            match self.line_search(z, c, t, &step) {
                Some(alpha) => {
                    for (zi, di) in z.iter_mut().zip(&step.dz) {
                        *zi += alpha * di;
                    }
                }
                None => return Ok(()),
            }
        }
        Ok(())
    }

    /// Largest step in `[0, 1]` along `dz` keeping a fixed fraction of the
    /// distance to the boundary, with the spectrum of the whitened step.
    fn step_spectrum(&self, step: &Step) -> (f64, Vec<f64>) {
        let r = self.pencil.dim;
        let mut d = ComplexMatrix::zeros(r);
        for (g, &w) in step.whitened.iter().zip(&step.dz) {
            for (o, x) in d.as_mut_slice().iter_mut().zip(g.as_slice()) {
                *o += x * w;
            }
        }
        let mu = eigvalsh_unchecked(&d);
        let mu_min = mu.first().copied().unwrap_or(0.0);
        let alpha = if mu_min < 0.0 {
            (FRACTION_TO_BOUNDARY / -mu_min).min(1.0)
        } else {
            1.0
        };
        (alpha, mu)
    }

    fn line_search(&self, z: &[f64], c: &[f64], t: f64, step: &Step) -> Option<f64> {
        let (mut alpha, mu) = self.step_spectrum(step);
        let slope = t * dot(c, &step.dz);
        let mut trial = vec![0.0; z.len()];
        for _ in 0..MAX_BACKTRACKS {
            // f(z + αdz) - f(z), with the log det change taken from the spectrum of the step
            let df = alpha * slope - mu.iter().map(|m| libm::log1p(alpha * m)).sum::<f64>();
            if df <= -self.cfg.armijo * alpha * step.lambda2 {
                for ((ti, zi), di) in trial.iter_mut().zip(z).zip(&step.dz) {
                    *ti = zi + alpha * di;
                }
                if self.feasible(&trial) {
                    return Some(alpha);
                }
            }
            alpha *= self.cfg.backtrack;
        }
        None
    }

    /// Moves a centered point toward the center at `t_growth · t` along the
    /// path tangent. The central path is close to affine in `1/t`, giving
    /// the step `-(1 - 1/g) t H⁻¹ c`.
    fn predict(&self, z: &mut [f64], c: &[f64], t: f64) {
        let Some(mut step) = self.newton(z, c, t, false) else {
            return;
        };
        let scale = 1.0 - 1.0 / self.cfg.t_growth;
        step.dz.iter_mut().for_each(|d| *d *= scale);
        let (alpha, _) = self.step_spectrum(&step);
        let trial: Vec<f64> = z.iter().zip(&step.dz).map(|(zi, di)| zi + alpha * di).collect();
        if self.feasible(&trial) {
            z.copy_from_slice(&trial);
        }
    }

    /// Follows the central path from `t0`, multiplying `t` by the growth
    /// factor until `dim / t` falls below the gap tolerance or `stop` accepts
    /// the iterate. Returns the final `t`.
    pub fn minimize(
        &self,
        z: &mut [f64],
        c: &[f64],
        t0: f64,
        budget: &mut Budget,
        mut stop: impl FnMut(&[f64]) -> bool,
    ) -> Result<f64> {
        let mut t = t0;
        loop {
            self.centre(z, c, t, budget)?;
            if stop(z) || (self.pencil.dim as f64) / t < self.cfg.sdp_tol {
                return Ok(t);
            }
            self.predict(z, c, t);
            t *= self.cfg.t_growth;
        }
    }
}

/// Solves `RᵀR dz = Rᵀ Qᵀu - t c` where `u` packs the identity restricted to
/// its first `unit` diagonal entries (all of them, or none).
fn qr_step(mut a: Vec<f64>, rows: usize, m: usize, unit: usize, tc: &[f64]) -> Option<(Vec<f64>, f64)> {
    let mut u = vec![0.0; rows];
    u[..unit].fill(1.0);
    let diag = householder(&mut a, rows, m, &mut u);
    let big = diag.iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
    if diag.iter().any(|d| !(d.abs() > QR_PIVOT_FLOOR * big)) {
        return None;
    }
    let rij = |i: usize, j: usize| if i == j { diag[i] } else { a[j * rows + i] };
    // Rᵀ w = t c
    let mut w = vec![0.0; m];
    for i in 0..m {
        let mut s = tc[i];
        for k in 0..i {
            s -= rij(k, i) * w[k];
        }
        w[i] = s / diag[i];
    }
    let y: Vec<f64> = (0..m).map(|i| u[i] - w[i]).collect();
    let mut dz = y.clone();
    for i in (0..m).rev() {
        let mut s = dz[i];
        for k in i + 1..m {
            s -= rij(i, k) * dz[k];
        }
        dz[i] = s / diag[i];
    }
    Some((dz, dot(&y, &y)))
}

/// Fallback for rank-deficient `Mᵀ`: damped normal equations.
fn normal_step(a: &[f64], rows: usize, m: usize, unit: usize, tc: &[f64]) -> Option<(Vec<f64>, f64)> {
    let col = |i: usize| &a[i * rows..(i + 1) * rows];
    let h = SymMatrix::from_fn(m, |i, j| dot(col(i), col(j)));
    let rhs: Vec<f64> = (0..m).map(|i| col(i)[..unit].iter().sum::<f64>() - tc[i]).collect();
    let sol = solve_sym(&h, &rhs).ok()?;
    let lambda2 = dot(&sol.x, &rhs);
    Some((sol.x, lambda2.max(0.0)))
}
