//! Dense complex Hermitian linear algebra for small matrices.
//!
//! Eigenvalues come from Householder tridiagonalization followed by the
//! implicit QL iteration. Sizes stay below 64, so everything is unblocked.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Asymmetry accepted by the public eigenvalue routines.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn from_vec(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = C64::new(d, 0.0);
        }
        m
    }

    /// The projector `v v†`.
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (a, b) = (self.dim, other.dim);
        Self::from_fn(a * b, |i, j| self[(i / b, j / b)] * other[(i % b, j % b)])
    }

    /// Largest `|m[i][j] - conj(m[j][i])|`.
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `(m + m†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim;
        (0..n)
            .map(|i| (0..n).map(|j| self.data[i * n + j] * v[j]).sum())
            .collect()
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, " {:+.4}{:+.4}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in product");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in sum");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in difference");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Eigen-decomposition of a Hermitian matrix. Column `i` of `vectors`
/// belongs to `values[i]`; values ascend.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, i: usize) -> Vec<C64> {
        let n = self.vectors.dim();
        (0..n).map(|r| self.vectors[(r, i)]).collect()
    }
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let asymmetry = m.max_asymmetry();
    if asymmetry > HERMITIAN_TOL {
        return Err(Error::NotHermitian { asymmetry });
    }
    Ok(())
}

pub fn eigh(m: &ComplexMatrix) -> Result<HermitianEigen> {
    check_hermitian(m)?;
    Ok(eigh_unchecked(m))
}

pub fn eigvalsh(m: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    Ok(eigvalsh_unchecked(m))
}

pub fn min_eig(m: &ComplexMatrix) -> Result<f64> {
    Ok(eigvalsh(m)?.first().copied().unwrap_or(0.0))
}

/// Natural-log determinant of a positive definite matrix.
pub fn logdet_pd(m: &ComplexMatrix) -> Result<f64> {
    check_hermitian(m)?;
    match cholesky(m) {
        Some(l) => Ok((0..m.dim()).map(|i| 2.0 * libm::log(l[(i, i)].re)).sum()),
        None => Err(Error::NotPositiveDefinite {
            min_eig: eigvalsh_unchecked(m).first().copied().unwrap_or(0.0),
        }),
    }
}

/// Eigen-decomposition of the Hermitian part of `m`, no validation.
pub(crate) fn eigh_unchecked(m: &ComplexMatrix) -> HermitianEigen {
    let n = m.dim();
    let mut a = m.hermitian_part().into_vec();
    let mut q = ComplexMatrix::identity(n).into_vec();
    let (mut d, sub) = tridiagonalize(&mut a, n, Some(&mut q));
    let (mut e, phases) = real_off_diagonal(&sub);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tql2(&mut d, &mut e, Some(&mut z), n);
    let vectors = ComplexMatrix::from_fn(n, |r, c| (0..n).map(|k| q[r * n + k] * phases[k] * z[k * n + c]).sum());
    HermitianEigen { values: d, vectors }
}

pub(crate) fn eigvalsh_unchecked(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.dim();
    let mut a = m.hermitian_part().into_vec();
    let (mut d, sub) = tridiagonalize(&mut a, n, None);
    let (mut e, _) = real_off_diagonal(&sub);
    tql2(&mut d, &mut e, None, n);
    d
}

/// Householder reduction `a = Q T Q†` of a Hermitian matrix (row-major).
/// Returns the real diagonal and the complex subdiagonal (`sub[i] = T[i][i-1]`,
/// `sub[0] = 0`); accumulates `Q` when requested.
fn tridiagonalize(a: &mut [C64], n: usize, mut q: Option<&mut [C64]>) -> (Vec<f64>, Vec<C64>) {
    let mut v = vec![ZERO; n];
    let mut w = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let x0 = a[(k + 1) * n + k];
        let mut tail = 0.0;
        for i in 2..=m {
            tail += a[(k + i) * n + k].norm_sqr();
        }
        if tail == 0.0 {
            continue;
        }
        let xnorm = libm::sqrt(tail + x0.norm_sqr());
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * xnorm;
        for i in 0..m {
            v[i] = a[(k + 1 + i) * n + k];
        }
        v[0] -= alpha;
        let vnorm2: f64 = v[..m].iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / vnorm2;
        for i in 0..m {
            let row = &a[(k + 1 + i) * n + k + 1..(k + 2 + i) * n];
            let s: C64 = row.iter().zip(&v[..m]).map(|(x, y)| x * y).sum();
            w[i] = s * tau;
        }
        let vw: C64 = (0..m).map(|i| v[i].conj() * w[i]).sum();
        let kk = vw * (0.5 * tau);
        for i in 0..m {
            w[i] -= kk * v[i];
        }
        for i in 0..m {
            for j in 0..m {
                a[(k + 1 + i) * n + k + 1 + j] -= v[i] * w[j].conj() + w[i] * v[j].conj();
            }
        }
        a[(k + 1) * n + k] = alpha;
        a[k * n + k + 1] = alpha.conj();
        for i in 1..m {
            a[(k + 1 + i) * n + k] = ZERO;
            a[k * n + k + 1 + i] = ZERO;
        }
        if let Some(q) = q.as_deref_mut() {
            for r in 0..n {
                let row = &mut q[r * n + k + 1..(r + 1) * n];
                let s: C64 = row.iter().zip(&v[..m]).map(|(x, y)| x * y).sum::<C64>() * tau;
                for (x, y) in row.iter_mut().zip(&v[..m]) {
                    *x -= s * y.conj();
                }
            }
        }
    }
    let diag = (0..n).map(|i| a[i * n + i].re).collect();
    let mut sub = vec![ZERO; n];
    for i in 1..n {
        sub[i] = a[i * n + i - 1];
    }
    (diag, sub)
}

/// Unitary diagonal `D` with `D† T D` real; returns `(|sub|, D)`.
fn real_off_diagonal(sub: &[C64]) -> (Vec<f64>, Vec<C64>) {
    let n = sub.len();
    let mut e = vec![0.0; n];
    let mut phases = vec![ONE; n];
    for i in 1..n {
        let r = sub[i].norm();
        e[i] = r;
        phases[i] = if r > 0.0 {
            phases[i - 1] * (sub[i] / r)
        } else {
            phases[i - 1]
        };
    }
    (e, phases)
}

/// Implicit QL iteration on a symmetric tridiagonal matrix with diagonal `d`
/// and subdiagonal `e` (`e[i] = T[i][i-1]`). Eigenvalues land in `d`, sorted
/// ascending; `z` (row-major, `n x n`) is rotated alongside when provided.
fn tql2(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>, n: usize) {
    if n == 0 {
        return;
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            for _ in 0..60 {
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        for k in 0..n {
                            let zk1 = z[k * n + i + 1];
                            let zk = z[k * n + i];
                            z[k * n + i + 1] = s * zk + c * zk1;
                            z[k * n + i] = c * zk - s * zk1;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    // selection sort keeps eigenvector columns paired with their values
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        for j in i + 1..n {
            if d[j] < d[k] {
                k = j;
            }
        }
        if k != i {
            d.swap(i, k);
            if let Some(z) = z.as_deref_mut() {
                for r in 0..n {
                    z.swap(r * n + i, r * n + k);
                }
            }
        }
    }
}

/// Lower Cholesky factor of a Hermitian positive definite matrix.
pub fn cholesky(m: &ComplexMatrix) -> Option<ComplexMatrix> {
    let mut l = m.clone();
    if cholesky_in_place(l.as_mut_slice(), m.dim()) {
        Some(l)
    } else {
        None
    }
}

/// Overwrites the lower triangle of `a` with its Cholesky factor and zeroes
/// the strict upper triangle. Returns false if a pivot is not positive.
pub(crate) fn cholesky_in_place(a: &mut [C64], n: usize) -> bool {
    for j in 0..n {
        let mut s = a[j * n + j].re;
        for k in 0..j {
            s -= a[j * n + k].norm_sqr();
        }
        if !(s > 0.0) || !s.is_finite() {
            return false;
        }
        let djj = libm::sqrt(s);
        a[j * n + j] = C64::new(djj, 0.0);
        for i in j + 1..n {
            let mut t = a[i * n + j];
            for k in 0..j {
                t -= a[i * n + k] * a[j * n + k].conj();
            }
            a[i * n + j] = t / djj;
        }
        for i in j + 1..n {
            a[j * n + i] = ZERO;
        }
    }
    true
}

/// Dense real square matrix, row-major; used for Newton systems.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n);
        for (i, &x) in diag.iter().enumerate() {
            m.data[i * n + i] = x;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| self.data[i * n..(i + 1) * n].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.n, |i, j| C64::new(self[(i, j)], 0.0))
    }
}

impl Index<(usize, usize)> for SymMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for SymMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Eigen-decomposition of a real symmetric matrix (symmetric part used).
/// Returns ascending values and the eigenvectors as columns, row-major.
pub fn sym_eigen(h: &SymMatrix) -> (Vec<f64>, SymMatrix) {
    let eig = eigh_unchecked(&h.to_complex());
    let n = h.size();
    let vectors = SymMatrix::from_fn(n, |i, j| eig.vectors[(i, j)].re);
    (eig.values, vectors)
}

/// Solution of a damped Newton system `(h + damping I) x = g`.
#[derive(Clone, Debug, PartialEq)]
pub struct DampedSolve {
    pub x: Vec<f64>,
    pub damping: f64,
}

const DAMPING_START: f64 = 1e-12;
const DAMPING_LIMIT: f64 = 1e12;

/// Solves `h x = g` by Cholesky, adding diagonal damping `λI` until the
/// factorization succeeds. `λ` starts at 0, then at `1e-12` times the largest
/// diagonal magnitude, growing tenfold.
pub fn solve_sym(h: &SymMatrix, g: &[f64]) -> Result<DampedSolve> {
    let n = h.size();
    if g.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: g.len(),
        });
    }
    if !h.data.iter().chain(g).all(|x| x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let scale = (0..n).map(|i| h[(i, i)].abs()).fold(1.0, f64::max);
    let mut damping = 0.0;
    let mut l = vec![0.0; n * n];
    loop {
        if real_cholesky(h, damping, &mut l) {
            let x = cholesky_solve(&l, n, g);
            return Ok(DampedSolve { x, damping });
        }
        damping = if damping == 0.0 {
            DAMPING_START * scale
        } else {
            damping * 10.0
        };
        if damping > DAMPING_LIMIT * scale {
            let (values, _) = sym_eigen(h);
            return Err(Error::NotPositiveDefinite {
                min_eig: values.first().copied().unwrap_or(0.0),
            });
        }
    }
}

fn real_cholesky(h: &SymMatrix, damping: f64, l: &mut [f64]) -> bool {
    let n = h.size();
    for j in 0..n {
        let mut s = h[(j, j)] + damping;
        for k in 0..j {
            s -= l[j * n + k] * l[j * n + k];
        }
        if !(s > 0.0) {
            return false;
        }
        let djj = libm::sqrt(s);
        l[j * n + j] = djj;
        for i in j + 1..n {
            let mut t = h[(i, j)];
            for k in 0..j {
                t -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = t / djj;
        }
    }
    true
}

fn cholesky_solve(l: &[f64], n: usize, g: &[f64]) -> Vec<f64> {
    let mut y = g.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    y
}
