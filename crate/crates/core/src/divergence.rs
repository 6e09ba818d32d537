//! Scalar information measures and the divergence axiom laboratory.

use alloc::vec::Vec;

use crate::pauli::BlochVector;
use crate::{Error, Result};

/// χ² divergence between the two-outcome distributions `((1+b)/2, (1-b)/2)`
/// and `((1+h)/2, (1-h)/2)`, i.e. `(b - h)^2 / (1 - h^2)`.
pub fn chi2_bloch(b: f64, h: f64) -> Result<f64> {
    if !(h.abs() < 1.0) {
        return Err(Error::DegenerateReference { h });
    }
    if !(b.abs() <= 1.0 + 1e-9) {
        return Err(Error::OutOfDomain { what: "b", value: b });
    }
    let p = (1.0 + b) / 2.0;
    let q = (1.0 + h) / 2.0;
    let two_term = p * p / q + (1.0 - p) * (1.0 - p) / (1.0 - q) - 1.0;
    let simple = (b - h) * (b - h) / (1.0 - h * h);
    debug_assert!(
        (two_term - simple).abs() <= 1e-12 * (1.0 + p * p / q + (1.0 - p) * (1.0 - p) / (1.0 - q)),
        "chi2 forms disagree: {two_term} vs {simple}"
    );
    Ok(simple)
}

/// `Σ_{j≥2} chi2_bloch(b_j, 0) = Σ_{j≥2} b_j^2`.
pub fn prior_info(v: &BlochVector) -> f64 {
    v.as_slice()[1..].iter().map(|b| b * b).sum()
}

/// Normalized squared distance from the uniform distribution on `2^k`
/// outcomes, scaled by `2^k k / (2^k - 1)`.
pub fn bz_measure(p: &[f64]) -> Result<f64> {
    let len = p.len();
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::DimensionMismatch {
            expected: len.next_power_of_two().max(2),
            got: len,
        });
    }
    let sum: f64 = p.iter().sum();
    if !((sum - 1.0).abs() <= 1e-10) {
        return Err(Error::NotNormalized { sum });
    }
    let k = len.trailing_zeros() as f64;
    let d = len as f64;
    let norm = d * k / (d - 1.0);
    let u = 1.0 / d;
    Ok(norm * p.iter().map(|x| (x - u) * (x - u)).sum::<f64>())
}

/// Two-point distribution `[p1, 1 - p1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bernoulli {
    p1: f64,
}

impl Bernoulli {
    pub fn new(p1: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p1) {
            return Err(Error::OutOfDomain {
                what: "probability",
                value: p1,
            });
        }
        Ok(Self { p1 })
    }

    pub fn p1(self) -> f64 {
        self.p1
    }

    pub fn p2(self) -> f64 {
        1.0 - self.p1
    }

    fn parts(self) -> [f64; 2] {
        [self.p1, 1.0 - self.p1]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LogBase {
    E,
    Two,
}

/// Discrete Kullback-Leibler divergence `Σ p_i log(p_i / q_i)`; infinite when
/// `p` puts mass where `q` has none.
pub fn kld(p: Bernoulli, q: Bernoulli, base: LogBase) -> f64 {
    let mut s = 0.0;
    for (a, c) in p.parts().into_iter().zip(q.parts()) {
        if a > 0.0 {
            if c == 0.0 {
                return f64::INFINITY;
            }
            s += a * libm::log(a / c);
        }
    }
    let s = s.max(0.0);
    match base {
        LogBase::E => s,
        LogBase::Two => s * core::f64::consts::LOG2_E,
    }
}

/// Fisher-Rao geodesic distance, `2 arccos(√(p1 q1) + √(p2 q2))`.
pub fn frd(p: Bernoulli, q: Bernoulli) -> f64 {
    let bc = libm::sqrt(p.p1() * q.p1()) + libm::sqrt(p.p2() * q.p2());
    2.0 * libm::acos(bc.min(1.0))
}

fn entropy_bits(p: Bernoulli) -> f64 {
    -p.parts()
        .into_iter()
        .filter(|&x| x > 0.0)
        .map(|x| x * libm::log2(x))
        .sum::<f64>()
}

/// `H(p) - H(q)` in bits.
pub fn entropy_diff(p: Bernoulli, q: Bernoulli) -> f64 {
    entropy_bits(p) - entropy_bits(q)
}

/// `Σ p_i^2 / q_i - 1`; infinite when `q` vanishes under mass of `p`.
pub fn chi2(p: Bernoulli, q: Bernoulli) -> f64 {
    let mut s = -1.0;
    for (a, c) in p.parts().into_iter().zip(q.parts()) {
        if a > 0.0 {
            if c == 0.0 {
                return f64::INFINITY;
            }
            s += a * a / c;
        }
    }
    s.max(0.0)
}

/// Natural log of the binomial pmf `C(m, count) p1^count p2^(m - count)`;
/// `-inf` when the count is impossible.
pub fn log_binom_likelihood(m: u64, count: u64, prob: Bernoulli) -> Result<f64> {
    if m == 0 {
        return Err(Error::OutOfDomain {
            what: "sample size",
            value: 0.0,
        });
    }
    if count > m {
        return Err(Error::OutOfDomain {
            what: "count",
            value: count as f64,
        });
    }
    let (m_f, k_f) = (m as f64, count as f64);
    let log_choose = libm::lgamma(m_f + 1.0) - libm::lgamma(k_f + 1.0) - libm::lgamma(m_f - k_f + 1.0);
    let term = |n: f64, p: f64| -> f64 {
        if n == 0.0 {
            0.0
        } else if p == 0.0 {
            f64::NEG_INFINITY
        } else {
            n * libm::log(p)
        }
    };
    Ok(log_choose + term(k_f, prob.p1()) + term(m_f - k_f, prob.p2()))
}

/// Candidate information measures `d(p, q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MeasureId {
    #[cfg_attr(feature = "serde", serde(rename = "HD"))]
    Hd,
    #[cfg_attr(feature = "serde", serde(rename = "FRD"))]
    Frd,
    #[cfg_attr(feature = "serde", serde(rename = "KLD_e"))]
    KldE,
    #[cfg_attr(feature = "serde", serde(rename = "KLD_2"))]
    Kld2,
    #[cfg_attr(feature = "serde", serde(rename = "CSD"))]
    Csd,
}

impl MeasureId {
    pub const ALL: [MeasureId; 5] = [
        MeasureId::Hd,
        MeasureId::Frd,
        MeasureId::KldE,
        MeasureId::Kld2,
        MeasureId::Csd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeasureId::Hd => "HD",
            MeasureId::Frd => "FRD",
            MeasureId::KldE => "KLD_e",
            MeasureId::Kld2 => "KLD_2",
            MeasureId::Csd => "CSD",
        }
    }

    /// Information `d(p, q)` carried by an update from `q` to `p`.
    pub fn eval(self, p: Bernoulli, q: Bernoulli) -> f64 {
        match self {
            MeasureId::Hd => entropy_diff(p, q),
            MeasureId::Frd => frd(p, q),
            MeasureId::KldE => kld(p, q, LogBase::E),
            MeasureId::Kld2 => kld(p, q, LogBase::Two),
            MeasureId::Csd => chi2(p, q),
        }
    }

    /// Reference verdicts for NN, LC, AS, 1-Bit and WLC, in [`Axiom::ALL`] order.
    pub fn table_expectation(self) -> [bool; 5] {
        match self {
            MeasureId::Hd => [false, false, true, true, false],
            MeasureId::Frd => [true, false, false, false, false],
            MeasureId::KldE => [true, true, true, false, false],
            MeasureId::Kld2 => [true, true, true, true, false],
            MeasureId::Csd => [true, true, true, true, true],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Axiom {
    #[cfg_attr(feature = "serde", serde(rename = "NN"))]
    NonNegativity,
    #[cfg_attr(feature = "serde", serde(rename = "LC"))]
    LikelihoodConsistency,
    #[cfg_attr(feature = "serde", serde(rename = "AS"))]
    Asymmetry,
    #[cfg_attr(feature = "serde", serde(rename = "1-Bit"))]
    OneBit,
    #[cfg_attr(feature = "serde", serde(rename = "WLC"))]
    WeakLikelihoodConsistency,
}

impl Axiom {
    pub const ALL: [Axiom; 5] = [
        Axiom::NonNegativity,
        Axiom::LikelihoodConsistency,
        Axiom::Asymmetry,
        Axiom::OneBit,
        Axiom::WeakLikelihoodConsistency,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::NonNegativity => "NN",
            Axiom::LikelihoodConsistency => "LC",
            Axiom::Asymmetry => "AS",
            Axiom::OneBit => "1-Bit",
            Axiom::WeakLikelihoodConsistency => "WLC",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Verdict {
    Holds,
    Fails,
    /// No admissible sample existed.
    Skipped,
}

/// A grid point violating an axiom: `lhs` and `rhs` are the two quantities
/// compared (`d` values, or `d` against the required constant).
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Counterexample {
    pub p1: f64,
    pub q1: f64,
    pub m: Option<u64>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AxiomCheck {
    pub axiom: Axiom,
    pub verdict: Verdict,
    /// Verdict listed in the reference table.
    pub expected: bool,
    pub checked: usize,
    pub skipped: usize,
    pub violations: usize,
    /// First few violations, at most [`MAX_COUNTEREXAMPLES`].
    pub counterexamples: Vec<Counterexample>,
}

impl AxiomCheck {
    /// True when the empirical verdict contradicts the table.
    pub fn disagrees(&self) -> bool {
        match self.verdict {
            Verdict::Holds => !self.expected,
            Verdict::Fails => self.expected,
            Verdict::Skipped => false,
        }
    }
}

pub const MAX_COUNTEREXAMPLES: usize = 5;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AxiomReport {
    pub measure: MeasureId,
    pub grid_steps: usize,
    pub m_list: Vec<u64>,
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn check(&self, axiom: Axiom) -> &AxiomCheck {
        self.checks
            .iter()
            .find(|c| c.axiom == axiom)
            .expect("every axiom is checked")
    }

    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.verdict != Verdict::Fails)
    }

    pub fn disagreements(&self) -> Vec<Axiom> {
        self.checks.iter().filter(|c| c.disagrees()).map(|c| c.axiom).collect()
    }
}

pub const DEFAULT_GRID_STEPS: usize = 20;
pub const DEFAULT_M_LIST: [u64; 4] = [10, 20, 50, 100];

/// Tolerance separating distinct divergence values.
const VALUE_TOL: f64 = 1e-12;
/// Tolerance separating distinct log-likelihoods.
const LOG_LIKELIHOOD_TOL: f64 = 1e-9;

struct Tally {
    axiom: Axiom,
    expected: bool,
    checked: usize,
    skipped: usize,
    violations: usize,
    counterexamples: Vec<Counterexample>,
}

impl Tally {
    fn new(axiom: Axiom, expected: bool) -> Self {
        Self {
            axiom,
            expected,
            checked: 0,
            skipped: 0,
            violations: 0,
            counterexamples: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, cx: impl FnOnce() -> Counterexample) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
            if self.counterexamples.len() < MAX_COUNTEREXAMPLES {
                self.counterexamples.push(cx());
            }
        }
    }

    /// `Fails` on any violation; otherwise `Holds`, or `Skipped` if nothing was checked.
    fn finish(self) -> AxiomCheck {
        let verdict = if self.violations > 0 {
            Verdict::Fails
        } else if self.checked == 0 {
            Verdict::Skipped
        } else {
            Verdict::Holds
        };
        AxiomCheck {
            axiom: self.axiom,
            verdict,
            expected: self.expected,
            checked: self.checked,
            skipped: self.skipped,
            violations: self.violations,
            counterexamples: self.counterexamples,
        }
    }

    /// Like `finish`, but an existence claim: holds iff some check succeeded.
    fn finish_existential(self, found: bool) -> AxiomCheck {
        let mut c = self.finish();
        c.verdict = if found { Verdict::Holds } else { Verdict::Fails };
        c
    }
}

fn sign(x: f64, tol: f64) -> i8 {
    if x > tol {
        1
    } else if x < -tol {
        -1
    } else {
        0
    }
}

fn bern(p1: f64) -> Bernoulli {
    Bernoulli { p1 }
}

/// Likelihood of observing the frequency `k / m` when sampling `m` times from `truth`.
fn log_likelihood(m: u64, k: u64, truth: f64) -> f64 {
    log_binom_likelihood(m, k, bern(truth)).expect("count within sample size")
}

/// Empirical check of NN, LC, AS, 1-Bit and WLC for one measure over the
/// grid `p1, q1 ∈ {1/g, …, 1 - 1/g}`. Sample sizes `m` enter only where
/// `m p1` and `m q1` (and `m r1` for WLC) are integers; other pairs count
/// as skipped.
pub fn check_axioms(measure: MeasureId, grid_steps: usize, m_list: &[u64]) -> Result<AxiomReport> {
    if grid_steps < 2 {
        return Err(Error::OutOfDomain {
            what: "grid_steps",
            value: grid_steps as f64,
        });
    }
    let g = grid_steps as u64;
    let expected = measure.table_expectation();
    let d = |p: f64, q: f64| measure.eval(bern(p), bern(q));
    let at = |i: u64| i as f64 / g as f64;

    let mut nn = Tally::new(Axiom::NonNegativity, expected[0]);
    let mut lc = Tally::new(Axiom::LikelihoodConsistency, expected[1]);
    let mut asym = Tally::new(Axiom::Asymmetry, expected[2]);
    let mut one_bit = Tally::new(Axiom::OneBit, expected[3]);
    let mut wlc = Tally::new(Axiom::WeakLikelihoodConsistency, expected[4]);

    let mut asymmetric_pair = false;
    for i in 1..g {
        for k in 1..g {
            let (p, q) = (at(i), at(k));
            let dpq = d(p, q);
            nn.record(dpq >= -VALUE_TOL, || Counterexample {
                p1: p,
                q1: q,
                m: None,
                lhs: dpq,
                rhs: 0.0,
            });
            if i == k {
                continue;
            }
            let dqp = d(q, p);
            asym.checked += 1;
            if (dpq - dqp).abs() > VALUE_TOL {
                asymmetric_pair = true;
            } else if asym.counterexamples.len() < MAX_COUNTEREXAMPLES {
                asym.counterexamples.push(Counterexample {
                    p1: p,
                    q1: q,
                    m: None,
                    lhs: dpq,
                    rhs: dqp,
                });
            }
            for &m in m_list {
                if (m * i) % g != 0 || (m * k) % g != 0 {
                    lc.skipped += 1;
                    continue;
                }
                // l_p2q: truth q, observed frequency p; l_q2p: the reverse.
                let l_p2q = log_likelihood(m, m * i / g, q);
                let l_q2p = log_likelihood(m, m * k / g, p);
                let agree = sign(l_p2q - l_q2p, LOG_LIKELIHOOD_TOL) == sign(dqp - dpq, VALUE_TOL);
                lc.record(agree, || Counterexample {
                    p1: p,
                    q1: q,
                    m: Some(m),
                    lhs: dpq,
                    rhs: dqp,
                });
            }
        }
    }
    let asym = asym.finish_existential(asymmetric_pair);

    let extreme = d(1.0, 0.5);
    one_bit.record((extreme - 1.0).abs() <= VALUE_TOL, || Counterexample {
        p1: 1.0,
        q1: 0.5,
        m: None,
        lhs: extreme,
        rhs: 1.0,
    });

    // p = q + e, r = q - e, all strictly inside (0, 1).
    for i in 1..g {
        for k in 1..g {
            if k >= i || i + k >= g {
                continue;
            }
            let q = at(i);
            let (p, r) = (at(i + k), at(i - k));
            let (dpq, drq) = (d(p, q), d(r, q));
            let (mut needs_le, mut needs_ge) = (false, false);
            for &m in m_list {
                if (m * i) % g != 0 || (m * k) % g != 0 {
                    wlc.skipped += 1;
                    continue;
                }
                let l_p2q = log_likelihood(m, m * (i + k) / g, q);
                let l_r2q = log_likelihood(m, m * (i - k) / g, q);
                match sign(l_p2q - l_r2q, LOG_LIKELIHOOD_TOL) {
                    1 => needs_le = true,
                    -1 => needs_ge = true,
                    _ => {
                        needs_le = true;
                        needs_ge = true;
                    }
                }
            }
            if !(needs_le || needs_ge) {
                continue;
            }
            let ok = (!needs_le || dpq <= drq + VALUE_TOL) && (!needs_ge || dpq >= drq - VALUE_TOL);
            wlc.record(ok, || Counterexample {
                p1: p,
                q1: q,
                m: None,
                lhs: dpq,
                rhs: drq,
            });
        }
    }

    Ok(AxiomReport {
        measure,
        grid_steps,
        m_list: m_list.to_vec(),
        checks: alloc::vec![nn.finish(), lc.finish(), asym, one_bit.finish(), wlc.finish()],
    })
}

/// `KLD_e(p, q) / (FRD(p, q)^2 / 2)` for `p = [1/2 + e, 1/2 - e]`, `q = [1/2, 1/2]`.
pub fn kld_frd_ratio(e: f64) -> f64 {
    let (p, q) = (bern(0.5 + e), bern(0.5));
    let f = frd(p, q);
    kld(p, q, LogBase::E) / (0.5 * f * f)
}
