//! Pauli-string basis, coefficient orderings and Bloch-vector conversion.
//!
//! Qubit 0 is the leftmost tensor factor and the most significant bit of a
//! computational-basis row index. Digits are 0 = I, 1 = X, 2 = Y, 3 = Z.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{min_eig, ComplexMatrix, C64, ONE, ZERO};
use crate::{Error, Result};

/// Largest supported qubit count.
pub const MAX_QUBITS: usize = 4;

/// Allowed excess of `|b_j|` over 1.
pub const BLOCH_SLACK: f64 = 1e-9;

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::QubitCount { n, max: MAX_QUBITS });
    }
    Ok(())
}

pub fn dim(n: usize) -> usize {
    1 << n
}

pub fn num_coefficients(n: usize) -> usize {
    1 << (2 * n)
}

/// Position `j` (1-based, natural order) of a Pauli string.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BasisIndex {
    pub n: usize,
    pub j: usize,
    pub digits: Vec<u8>,
}

impl BasisIndex {
    /// Looks up the natural-order index `j`.
    pub fn new(n: usize, j: usize) -> Result<Self> {
        check_n(n)?;
        if j == 0 || j > num_coefficients(n) {
            return Err(Error::IndexOutOfRange { j, n });
        }
        Ok(natural_digits(n).swap_remove(j - 1).into_index(n, j))
    }

    pub fn is_identity(&self) -> bool {
        self.j == 1
    }

    /// Bits flipped by the string (X or Y on that qubit).
    pub fn x_mask(&self) -> usize {
        mask(&self.digits, |d| d == 1 || d == 2)
    }

    /// Bits picking up a sign (Y or Z on that qubit).
    pub fn z_mask(&self) -> usize {
        mask(&self.digits, |d| d == 2 || d == 3)
    }

    /// Number of Y factors.
    pub fn y_count(&self) -> u32 {
        self.digits.iter().filter(|&&d| d == 2).count() as u32
    }

    /// Entry `T[row][row ^ x_mask]`, the only nonzero in that row.
    pub fn phase(&self, row: usize) -> C64 {
        pauli_phase(self.x_mask(), self.z_mask(), self.y_count(), row)
    }

    /// Label such as `"XIZ"`.
    pub fn label(&self) -> String {
        self.digits.iter().map(|&d| ['I', 'X', 'Y', 'Z'][d as usize]).collect()
    }

    /// Base-4 code with qubit 0 most significant.
    pub fn code(&self) -> usize {
        self.digits.iter().fold(0, |acc, &d| acc * 4 + d as usize)
    }
}

fn mask(digits: &[u8], pick: impl Fn(u8) -> bool) -> usize {
    let n = digits.len();
    digits
        .iter()
        .enumerate()
        .filter(|(_, &d)| pick(d))
        .fold(0, |acc, (q, _)| acc | 1 << (n - 1 - q))
}

/// `T[row][row ^ x]` for a string with masks `x`, `z` and `y` Y-factors:
/// `i^y (-1)^{popcount((row ^ x) & z)}`.
pub(crate) fn pauli_phase(x: usize, z: usize, y: u32, row: usize) -> C64 {
    // Y = i X Z on each factor, so T = i^y X^x Z^z with Z^z acting on the column.
    let sign = if ((row ^ x) & z).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    let iy = match y % 4 {
        0 => ONE,
        1 => C64::new(0.0, 1.0),
        2 => -ONE,
        _ => C64::new(0.0, -1.0),
    };
    iy * sign
}

struct Digits(Vec<u8>);

impl Digits {
    fn into_index(self, n: usize, j: usize) -> BasisIndex {
        BasisIndex { n, j, digits: self.0 }
    }
}

/// Graded-lexicographic enumeration: identity, then supports by size and
/// lexicographic element order, nonzero digits counted with the lowest
/// qubit slowest.
fn natural_digits(n: usize) -> Vec<Digits> {
    let mut out = vec![Digits(vec![0; n])];
    for size in 1..=n {
        let mut subset: Vec<usize> = (0..size).collect();
        loop {
            let total = 3usize.pow(size as u32);
            for count in 0..total {
                let mut digits = vec![0u8; n];
                let mut c = count;
                for pos in (0..size).rev() {
                    digits[subset[pos]] = (c % 3) as u8 + 1;
                    c /= 3;
                }
                out.push(Digits(digits));
            }
            if !next_combination(&mut subset, n) {
                break;
            }
        }
    }
    out
}

fn next_combination(s: &mut [usize], n: usize) -> bool {
    let k = s.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if s[i] < n - k + i {
            s[i] += 1;
            for t in i + 1..k {
                s[t] = s[t - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// All basis strings in natural order; element `j - 1` has index `j`.
pub fn natural_order(n: usize) -> Result<Vec<BasisIndex>> {
    check_n(n)?;
    Ok(natural_digits(n)
        .into_iter()
        .enumerate()
        .map(|(i, d)| d.into_index(n, i + 1))
        .collect())
}

/// Natural index of the string with the given base-4 code, for every code.
fn code_to_natural(n: usize) -> Vec<usize> {
    let mut table = vec![0; num_coefficients(n)];
    for (i, d) in natural_digits(n).into_iter().enumerate() {
        let code = d.0.iter().fold(0, |acc, &x| acc * 4 + x as usize);
        table[code] = i + 1;
    }
    table
}

/// Natural index of a digit string.
pub fn index_of(digits: &[u8]) -> Result<usize> {
    let n = digits.len();
    check_n(n)?;
    if digits.iter().any(|&d| d > 3) {
        return Err(Error::InvalidBloch("Pauli digit above 3"));
    }
    let code = digits.iter().fold(0, |acc, &x| acc * 4 + x as usize);
    Ok(code_to_natural(n)[code])
}

/// Order in which a pipeline visits coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum BasisOrder {
    Natural,
    /// Plain base-4 big-endian enumeration of digit strings.
    Base4,
}

impl BasisOrder {
    pub fn id(self) -> &'static str {
        match self {
            BasisOrder::Natural => "natural",
            BasisOrder::Base4 => "base4",
        }
    }

    /// Natural indices in visiting order.
    pub fn sequence(self, n: usize) -> Result<Vec<usize>> {
        check_n(n)?;
        Ok(match self {
            BasisOrder::Natural => (1..=num_coefficients(n)).collect(),
            BasisOrder::Base4 => code_to_natural(n),
        })
    }
}

/// Dense matrix of a Pauli string.
pub fn pauli_matrix(idx: &BasisIndex) -> ComplexMatrix {
    let d = dim(idx.n);
    let x = idx.x_mask();
    let mut m = ComplexMatrix::zeros(d);
    for row in 0..d {
        m[(row, row ^ x)] = idx.phase(row);
    }
    m
}

/// Real coefficient list `b_j = tr(T_j ρ)` in natural order, `b_1 = 1`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlochVector {
    n: usize,
    b: Vec<f64>,
}

impl BlochVector {
    pub fn new(n: usize, b: Vec<f64>) -> Result<Self> {
        check_n(n)?;
        if b.len() != num_coefficients(n) {
            return Err(Error::DimensionMismatch {
                expected: num_coefficients(n),
                got: b.len(),
            });
        }
        if b[0] != 1.0 {
            return Err(Error::InvalidBloch("first coefficient must be exactly 1"));
        }
        if b.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        if b.iter().any(|x| x.abs() > 1.0 + BLOCH_SLACK) {
            return Err(Error::InvalidBloch("coefficient magnitude exceeds 1"));
        }
        Ok(Self { n, b })
    }

    /// The maximally mixed state.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_n(n)?;
        let mut b = vec![0.0; num_coefficients(n)];
        b[0] = 1.0;
        Ok(Self { n, b })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Coefficient `b_j`, 1-based.
    pub fn get(&self, j: usize) -> f64 {
        self.b[j - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.b
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Hermitian, unit-trace, positive semidefinite state on `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    m: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates trace (1e-10), Hermiticity (1e-12) and positivity (-1e-8).
    pub fn new(n: usize, m: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(n, m, 1e-10, 1e-12, 1e-8)
    }

    pub fn with_tolerances(
        n: usize,
        m: ComplexMatrix,
        trace_tol: f64,
        hermitian_tol: f64,
        psd_tol: f64,
    ) -> Result<Self> {
        check_n(n)?;
        if m.dim() != dim(n) {
            return Err(Error::DimensionMismatch {
                expected: dim(n),
                got: m.dim(),
            });
        }
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let asymmetry = m.max_asymmetry();
        if asymmetry > hermitian_tol {
            return Err(Error::NotHermitian { asymmetry });
        }
        let trace = m.trace().re;
        if (trace - 1.0).abs() > trace_tol {
            return Err(Error::TraceNotOne { trace });
        }
        let lo = min_eig(&m)?;
        if lo < -psd_tol {
            return Err(Error::NotPsd { min_eig: lo });
        }
        Ok(Self { n, m })
    }

    /// `|ψ⟩⟨ψ|` for a normalized state vector (norm within 1e-8 of 1).
    pub fn from_statevector(n: usize, psi: &[C64]) -> Result<Self> {
        check_n(n)?;
        if psi.len() != dim(n) {
            return Err(Error::DimensionMismatch {
                expected: dim(n),
                got: psi.len(),
            });
        }
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if !norm2.is_finite() {
            return Err(Error::NonFinite);
        }
        if (norm2 - 1.0).abs() > 1e-8 {
            return Err(Error::TraceNotOne { trace: norm2 });
        }
        let s = 1.0 / libm::sqrt(norm2);
        let v: Vec<C64> = psi.iter().map(|z| z * s).collect();
        Ok(Self {
            n,
            m: ComplexMatrix::outer(&v).hermitian_part(),
        })
    }

    /// State with the given Bloch vector, rejected if not PSD within 1e-8.
    pub fn from_bloch(v: &BlochVector) -> Result<Self> {
        Self::new(v.n(), density_from_bloch(v))
    }

    pub(crate) fn from_parts_unchecked(n: usize, m: ComplexMatrix) -> Self {
        Self { n, m }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn bloch(&self) -> BlochVector {
        bloch_from_density(self).expect("a validated state has real coefficients")
    }
}

/// `tr(T ρ)` for a string given by masks.
fn pauli_expectation(m: &ComplexMatrix, x: usize, z: usize, y: u32) -> C64 {
    let d = m.dim();
    (0..d).map(|row| pauli_phase(x, z, y, row) * m[(row ^ x, row)]).sum()
}

/// Coefficients `b_j = Re tr(T_j ρ)`; imaginary residues above 1e-10 are rejected.
pub fn bloch_from_density(rho: &DensityMatrix) -> Result<BlochVector> {
    bloch_from_matrix(rho.n, &rho.m, 1e-10)
}

pub(crate) fn bloch_from_matrix(n: usize, m: &ComplexMatrix, imag_tol: f64) -> Result<BlochVector> {
    let order = natural_order(n)?;
    let mut b = Vec::with_capacity(order.len());
    for idx in &order {
        let t = pauli_expectation(m, idx.x_mask(), idx.z_mask(), idx.y_count());
        if t.im.abs() > imag_tol {
            return Err(Error::ImaginaryResidue {
                j: idx.j,
                residue: t.im.abs(),
            });
        }
        b.push(t.re);
    }
    b[0] = 1.0;
    Ok(BlochVector { n, b })
}

/// `Q = (1/2^n) Σ b_j T_j`; Hermitian with unit trace, positivity not checked.
pub fn density_from_bloch(v: &BlochVector) -> ComplexMatrix {
    let n = v.n;
    let d = dim(n);
    let mut m = ComplexMatrix::zeros(d);
    let scale = 1.0 / d as f64;
    for (idx, &bj) in natural_order(n).expect("valid n").iter().zip(&v.b) {
        if bj == 0.0 {
            continue;
        }
        let x = idx.x_mask();
        for row in 0..d {
            m[(row, row ^ x)] += idx.phase(row) * (bj * scale);
        }
    }
    m
}

/// `tr(Q^2) = (1/2^n) Σ b_j^2`.
pub fn purity(v: &BlochVector) -> f64 {
    v.b.iter().map(|x| x * x).sum::<f64>() / dim(v.n) as f64
}

/// Single-qubit Pauli matrix for digit `d`.
pub fn sigma(d: u8) -> ComplexMatrix {
    let i = C64::new(0.0, 1.0);
    let entries = match d {
        0 => [ONE, ZERO, ZERO, ONE],
        1 => [ZERO, ONE, ONE, ZERO],
        2 => [ZERO, -i, i, ZERO],
        _ => [ONE, ZERO, ZERO, -ONE],
    };
    ComplexMatrix::from_vec(2, entries.to_vec()).expect("2x2")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn labels(n: usize) -> Vec<String> {
        natural_order(n).unwrap().iter().map(|b| b.label()).collect()
    }

    #[test]
    fn one_qubit_order() {
        assert_eq!(labels(1), ["I", "X", "Y", "Z"]);
    }

    #[test]
    fn two_qubit_order_matches_block_layout() {
        let l = labels(2);
        assert_eq!(&l[1..4], ["XI", "YI", "ZI"]);
        assert_eq!(&l[4..7], ["IX", "IY", "IZ"]);
        assert_eq!(&l[7..16], ["XX", "XY", "XZ", "YX", "YY", "YZ", "ZX", "ZY", "ZZ"]);
        assert_eq!(BasisIndex::new(2, 8).unwrap().label(), "XX");
        assert_eq!(BasisIndex::new(2, 5).unwrap().label(), "IX");
    }

    #[test]
    fn three_qubit_order_grading() {
        let l = labels(3);
        assert_eq!(l.len(), 64);
        assert_eq!(&l[1..4], ["XII", "YII", "ZII"]);
        assert_eq!(&l[7..10], ["IIX", "IIY", "IIZ"]);
        // pairs (0,1), (0,2), (1,2) each with 9 strings
        assert_eq!(l[10], "XXI");
        assert_eq!(l[19], "XIX");
        assert_eq!(l[28], "IXX");
        assert_eq!(l[37], "XXX");
        assert_eq!(l[63], "ZZZ");
    }

    #[test]
    fn order_is_bijection() {
        for n in 1..=4 {
            let order = natural_order(n).unwrap();
            let mut codes: Vec<usize> = order.iter().map(|b| b.code()).collect();
            codes.sort_unstable();
            assert_eq!(codes, (0..num_coefficients(n)).collect::<Vec<_>>());
            for b in &order {
                assert_eq!(b.j == 1, b.digits.iter().all(|&d| d == 0));
                assert_eq!(index_of(&b.digits).unwrap(), b.j);
            }
        }
    }

    #[test]
    fn base4_sequence() {
        let seq = BasisOrder::Base4.sequence(2).unwrap();
        // codes 0..16: II IX IY IZ XI XX ...
        assert_eq!(&seq[..6], [1, 5, 6, 7, 2, 8]);
        assert_eq!(BasisOrder::Natural.sequence(1).unwrap(), [1, 2, 3, 4]);
    }

    #[test]
    fn rejects_bad_n() {
        assert!(natural_order(0).is_err());
        assert!(natural_order(MAX_QUBITS + 1).is_err());
        assert!(BasisIndex::new(2, 17).is_err());
        assert!(BasisIndex::new(2, 0).is_err());
    }

    #[test]
    fn matrices_match_kronecker_products() {
        for n in 1..=3 {
            for idx in natural_order(n).unwrap() {
                let mut k = sigma(idx.digits[0]);
                for &d in &idx.digits[1..] {
                    k = k.kron(&sigma(d));
                }
                assert_eq!(pauli_matrix(&idx), k, "{}", idx.label());
            }
        }
    }

    #[test]
    fn matrix_examples() {
        let xx = pauli_matrix(&BasisIndex::new(2, 8).unwrap());
        let anti = ComplexMatrix::from_fn(4, |i, j| if i + j == 3 { ONE } else { ZERO });
        assert_eq!(xx, anti);
        assert_eq!(
            pauli_matrix(&BasisIndex::new(2, 1).unwrap()),
            ComplexMatrix::identity(4)
        );
        let z = pauli_matrix(&BasisIndex::new(1, 4).unwrap());
        assert_eq!(z, ComplexMatrix::from_real_diagonal(&[1.0, -1.0]));
    }

    #[test]
    fn orthogonality_and_involution() {
        for n in 1..=3 {
            let mats: Vec<_> = natural_order(n).unwrap().iter().map(pauli_matrix).collect();
            let d = dim(n) as f64;
            for (a, ma) in mats.iter().enumerate() {
                let sq = ma * ma;
                assert_eq!(sq, ComplexMatrix::identity(dim(n)));
                if a > 0 {
                    assert_eq!(ma.trace(), ZERO);
                }
                for (b, mb) in mats.iter().enumerate() {
                    let t = (ma * mb).trace();
                    let expect = if a == b { d } else { 0.0 };
                    assert_abs_diff_eq!(t.re, expect, epsilon = 1e-12);
                    assert_abs_diff_eq!(t.im, 0.0, epsilon = 1e-12);
                }
            }
        }
    }

    fn bell() -> DensityMatrix {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let psi = [C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)];
        DensityMatrix::from_statevector(2, &psi).unwrap()
    }

    #[test]
    fn bell_coefficients() {
        let b = bell().bloch();
        let mut expect = vec![0.0; 16];
        expect[0] = 1.0;
        expect[7] = 1.0;
        expect[11] = -1.0;
        expect[15] = 1.0;
        for (x, y) in b.as_slice().iter().zip(&expect) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-15);
        }
        let back = density_from_bloch(&b);
        assert!((&back - bell().matrix()).frobenius_norm() < 1e-15);
    }

    #[test]
    fn simple_states() {
        let mixed = DensityMatrix::new(2, ComplexMatrix::identity(4).scale(0.25)).unwrap();
        assert_eq!(mixed.bloch(), BlochVector::maximally_mixed(2).unwrap());
        assert_abs_diff_eq!(purity(&mixed.bloch()), 0.25);
        let zero = DensityMatrix::from_statevector(1, &[ONE, ZERO]).unwrap();
        assert_eq!(zero.bloch().as_slice(), [1.0, 0.0, 0.0, 1.0]);
        let v = BlochVector::new(1, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(density_from_bloch(&v), ComplexMatrix::from_real_diagonal(&[1.0, 0.0]));
        assert_eq!(
            density_from_bloch(&BlochVector::maximally_mixed(3).unwrap()),
            ComplexMatrix::identity(8).scale(0.125)
        );
        assert_abs_diff_eq!(purity(&bell().bloch()), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn bloch_validation() {
        assert!(BlochVector::new(1, vec![0.5, 0.0, 0.0, 0.0]).is_err());
        assert!(BlochVector::new(1, vec![1.0, 1.1, 0.0, 0.0]).is_err());
        assert!(BlochVector::new(1, vec![1.0, 0.0]).is_err());
        assert!(BlochVector::new(1, vec![1.0, f64::NAN, 0.0, 0.0]).is_err());
        let unphysical = BlochVector::new(1, vec![1.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(matches!(
            DensityMatrix::from_bloch(&unphysical),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn density_validation() {
        let m = ComplexMatrix::from_real_diagonal(&[0.6, 0.6]);
        assert!(matches!(DensityMatrix::new(1, m), Err(Error::TraceNotOne { .. })));
        let mut m = ComplexMatrix::from_real_diagonal(&[0.5, 0.5]);
        m[(0, 1)] = C64::new(0.1, 0.0);
        assert!(matches!(DensityMatrix::new(1, m), Err(Error::NotHermitian { .. })));
        let m = ComplexMatrix::from_real_diagonal(&[1.5, -0.5]);
        assert!(matches!(DensityMatrix::new(1, m), Err(Error::NotPsd { .. })));
        assert!(DensityMatrix::new(1, ComplexMatrix::identity(4).scale(0.25)).is_err());
    }

    #[test]
    fn imaginary_residue_rejected() {
        // anti-Hermitian perturbation leaks into the imaginary parts
        let mut m = ComplexMatrix::identity(2).scale(0.5);
        m[(0, 1)] = C64::new(0.0, 0.1);
        m[(1, 0)] = C64::new(0.0, 0.1);
        assert!(matches!(
            bloch_from_matrix(1, &m, 1e-10),
            Err(Error::ImaginaryResidue { .. })
        ));
    }
}
