//! Seeded random state families.
//!
//! Every generator seeds its own `ChaCha20Rng` (rand_chacha, 20 rounds) with
//! `seed_from_u64`, so a `(family, n, seed, rank)` tuple reproduces the same
//! bits on every platform. Complex Gaussians draw the real part, then the
//! imaginary part, from `StandardNormal`.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::linalg::{ComplexMatrix, C64, ONE, ZERO};
use crate::pauli::{dim, DensityMatrix, MAX_QUBITS};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Family {
    Pure,
    Product,
    Bell,
    Ghz,
    Mixed,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::Pure, Family::Product, Family::Bell, Family::Ghz, Family::Mixed];

    pub fn name(self) -> &'static str {
        match self {
            Family::Pure => "pure",
            Family::Product => "product",
            Family::Bell => "bell",
            Family::Ghz => "ghz",
            Family::Mixed => "mixed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Family::ALL.into_iter().find(|f| f.name() == s)
    }
}

/// Everything needed to regenerate one state.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StateSpec {
    pub family: Family,
    pub n: usize,
    pub seed: u64,
    /// Rank of a mixed state; `None` means full rank.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub rank: Option<usize>,
}

impl StateSpec {
    pub fn new(family: Family, n: usize, seed: u64) -> Self {
        Self {
            family,
            n,
            seed,
            rank: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_QUBITS {
            return Err(Error::QubitCount {
                n: self.n,
                max: MAX_QUBITS,
            });
        }
        match self.family {
            Family::Bell if self.n != 2 => Err(Error::InvalidFamily {
                family: "bell",
                requirement: "n = 2",
            }),
            Family::Ghz if self.n < 3 => Err(Error::InvalidFamily {
                family: "ghz",
                requirement: "n >= 3",
            }),
            Family::Mixed => match self.rank {
                Some(r) if r == 0 || r > dim(self.n) => Err(Error::InvalidRank {
                    rank: r,
                    dim: dim(self.n),
                }),
                _ => Ok(()),
            },
            _ if self.rank.is_some() => Err(Error::InvalidFamily {
                family: self.family.name(),
                requirement: "no rank",
            }),
            _ => Ok(()),
        }
    }

    pub fn generate(&self) -> Result<DensityMatrix> {
        self.validate()?;
        match self.family {
            Family::Pure => haar_pure(self.n, self.seed),
            Family::Product => random_product(self.n, self.seed),
            Family::Bell => rotated_bell(self.seed),
            Family::Ghz => rotated_ghz(self.n, self.seed),
            Family::Mixed => ginibre_mixed(self.n, self.rank.unwrap_or(dim(self.n)), self.seed),
        }
    }
}

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut ChaCha20Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

fn normalized(mut v: Vec<C64>) -> Vec<C64> {
    let norm = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum());
    for z in &mut v {
        *z /= norm;
    }
    v
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::QubitCount { n, max: MAX_QUBITS });
    }
    Ok(())
}

fn haar_vector(rng: &mut ChaCha20Rng, len: usize) -> Vec<C64> {
    normalized((0..len).map(|_| gaussian(rng)).collect())
}

fn pure_state(n: usize, psi: &[C64]) -> Result<DensityMatrix> {
    DensityMatrix::from_statevector(n, psi)
}

/// Haar-random pure state on `n` qubits.
pub fn haar_pure(n: usize, seed: u64) -> Result<DensityMatrix> {
    check_n(n)?;
    let psi = haar_vector(&mut rng(seed), dim(n));
    pure_state(n, &psi)
}

/// Product of `n` independent Haar-random single-qubit pure states.
pub fn random_product(n: usize, seed: u64) -> Result<DensityMatrix> {
    check_n(n)?;
    let mut rng = rng(seed);
    let mut psi = vec![ONE];
    for _ in 0..n {
        psi = kron_vec(&psi, &haar_vector(&mut rng, 2));
    }
    pure_state(n, &psi)
}

/// Haar-random 2x2 unitary: Gram-Schmidt on a complex Ginibre matrix, which
/// leaves the triangular factor with a positive real diagonal.
pub fn haar_unitary_2(rng: &mut ChaCha20Rng) -> ComplexMatrix {
    let g: Vec<C64> = (0..4).map(|_| gaussian(rng)).collect();
    let c1 = normalized(vec![g[0], g[2]]);
    let proj = c1[0].conj() * g[1] + c1[1].conj() * g[3];
    let c2 = normalized(vec![g[1] - proj * c1[0], g[3] - proj * c1[1]]);
    ComplexMatrix::from_vec(2, vec![c1[0], c2[0], c1[1], c2[1]]).expect("2x2")
}

/// The four Bell vectors: 0 = Φ+, 1 = Φ-, 2 = Ψ+, 3 = Ψ-.
pub fn bell_state(which: usize) -> Vec<C64> {
    let s = C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
    match which % 4 {
        0 => vec![s, ZERO, ZERO, s],
        1 => vec![s, ZERO, ZERO, -s],
        2 => vec![ZERO, s, s, ZERO],
        _ => vec![ZERO, s, -s, ZERO],
    }
}

/// `(|0…0⟩ + |1…1⟩)/√2`.
pub fn ghz_state(n: usize) -> Vec<C64> {
    let d = dim(n);
    let s = C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut v = vec![ZERO; d];
    v[0] = s;
    v[d - 1] = s;
    v
}

fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Applies `U_0 ⊗ … ⊗ U_{n-1}` to a state vector; qubit 0 is the most
/// significant bit.
pub fn apply_local(psi: &[C64], unitaries: &[ComplexMatrix]) -> Vec<C64> {
    let n = unitaries.len();
    let mut out = psi.to_vec();
    for (q, u) in unitaries.iter().enumerate() {
        let bit = 1 << (n - 1 - q);
        for r in 0..out.len() {
            if r & bit == 0 {
                let (a, b) = (out[r], out[r | bit]);
                out[r] = u[(0, 0)] * a + u[(0, 1)] * b;
                out[r | bit] = u[(1, 0)] * a + u[(1, 1)] * b;
            }
        }
    }
    out
}

/// Random Bell state under independent Haar local unitaries.
pub fn rotated_bell(seed: u64) -> Result<DensityMatrix> {
    let mut rng = rng(seed);
    let which = rng.random_range(0..4usize);
    let u = [haar_unitary_2(&mut rng), haar_unitary_2(&mut rng)];
    pure_state(2, &apply_local(&bell_state(which), &u))
}

/// GHZ state under independent Haar local unitaries, `n >= 3`.
pub fn rotated_ghz(n: usize, seed: u64) -> Result<DensityMatrix> {
    check_n(n)?;
    if n < 3 {
        return Err(Error::InvalidFamily {
            family: "ghz",
            requirement: "n >= 3",
        });
    }
    let mut rng = rng(seed);
    let u: Vec<_> = (0..n).map(|_| haar_unitary_2(&mut rng)).collect();
    pure_state(n, &apply_local(&ghz_state(n), &u))
}

/// `G G† / tr(G G†)` for a `2^n x rank` complex Ginibre matrix `G`.
pub fn ginibre_mixed(n: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    check_n(n)?;
    let d = dim(n);
    if rank == 0 || rank > d {
        return Err(Error::InvalidRank { rank, dim: d });
    }
    let mut rng = rng(seed);
    let g: Vec<C64> = (0..d * rank).map(|_| gaussian(&mut rng)).collect();
    let mut m = ComplexMatrix::from_fn(d, |i, j| {
        (0..rank).map(|k| g[i * rank + k] * g[j * rank + k].conj()).sum()
    });
    let tr = m.trace().re;
    m = m.scale(1.0 / tr).hermitian_part();
    Ok(DensityMatrix::from_parts_unchecked(n, m))
}
