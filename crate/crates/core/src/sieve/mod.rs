//! Numeric Brun's-sieve engine.
//!
//! Joint factorial moments S^(i₁..i_r), the multivariate Bonferroni
//! sandwich Λ(k), Poisson reference laws, and the quantified ε → ε′ error
//! propagation: if every moment in the box {0..r(T+2s)}^r is within ε of
//! its Poisson value μ^t/t! (and ε sits in the admissible window), every
//! joint pmf value over {0..T}^r is within ε′ = 2·exp(2Σμᵢ)·ε + √ε of the
//! Poisson product.

mod bonferroni;
mod moments;

pub use bonferroni::{bonferroni_bounds, bonferroni_lambda, SieveBounds};
pub use moments::{
    factorial_moments_exact, factorial_moments_mc, FactorialMomentTable, JointPmf, MomentEntry,
};

use crate::scalar::CompensatedSum;
use crate::Scalar;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum SieveError {
    #[error("Poisson mean {0} must be positive")]
    NegativeMean(f64),
    #[error("need at least one Poisson mean")]
    EmptyParams,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("not a probability mass function: {0}")]
    NotAPmf(String),
    #[error("ensemble is empty")]
    EmptyEnsemble,
    #[error("overflow risk: {0}")]
    OverflowRisk(String),
    #[error("moment table lacks the entry at index {idx:?}")]
    TableTooSmall { idx: Vec<usize> },
    #[error("value {0} out of range")]
    OutOfRange(f64),
}

/// Means (μ₁,…,μ_r) of r independent Poisson reference variables.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonParams<F> {
    mus: Vec<F>,
}

impl<F: Scalar> PoissonParams<F> {
    pub fn new(mus: Vec<F>) -> Result<Self, SieveError> {
        if mus.is_empty() {
            return Err(SieveError::EmptyParams);
        }
        if let Some(&bad) = mus.iter().find(|&&mu| !(mu > F::zero())) {
            return Err(SieveError::NegativeMean(crate::spectral::to_f64(bad)));
        }
        Ok(Self { mus })
    }

    /// Single mean, the common case.
    pub fn uniform(mu: F, r: usize) -> Result<Self, SieveError> {
        Self::new(vec![mu; r.max(1)])
    }

    pub fn r(&self) -> usize {
        self.mus.len()
    }

    pub fn mus(&self) -> &[F] {
        &self.mus
    }

    /// μ = maxᵢ μᵢ, the mean entering the hypothesis window.
    pub fn mu_max(&self) -> F {
        self.mus.iter().copied().fold(F::zero(), F::max)
    }

    pub fn mu_sum(&self) -> F {
        self.mus.iter().copied().sum()
    }
}

/// ln t! by compensated summation; exact enough that the pmf stays within
/// 1e−12 relative up to t = 200 and usable to t = 10⁴.
pub(crate) fn ln_factorial<F: Scalar>(t: usize) -> F {
    let mut acc = CompensatedSum::default();
    for j in 2..=t {
        acc.add(F::from_count(j).ln());
    }
    acc.value()
}

/// e^(−μ) μ^t / t!, evaluated in log-space.
pub fn poisson_pmf<F: Scalar>(mu: F, t: usize) -> Result<F, SieveError> {
    if mu < F::zero() {
        return Err(SieveError::NegativeMean(crate::spectral::to_f64(mu)));
    }
    if mu == F::zero() {
        return Ok(if t == 0 { F::one() } else { F::zero() });
    }
    let ln = F::from_count(t) * mu.ln() - ln_factorial::<F>(t) - mu;
    Ok(ln.exp())
}

/// ∏ᵢ e^(−μᵢ) μᵢ^(tᵢ) / tᵢ!.
pub fn joint_poisson_pmf<F: Scalar>(
    params: &PoissonParams<F>,
    ts: &[usize],
) -> Result<F, SieveError> {
    if ts.len() != params.r() {
        return Err(SieveError::DimensionMismatch { expected: params.r(), found: ts.len() });
    }
    let mut p = F::one();
    for (&mu, &t) in params.mus().iter().zip(ts) {
        p = p * poisson_pmf(mu, t)?;
    }
    Ok(p)
}

/// μ^t / t! by a direct product — the factorial-moment value of Po(μ), and
/// the reference each measured moment is compared against.
pub(crate) fn poisson_factorial_weight<F: Scalar>(mu: F, t: usize) -> F {
    let mut w = F::one();
    for j in 1..=t {
        w = w * mu / F::from_count(j);
    }
    w
}

/// Visit every index tuple of {0..=limit}^r in lexicographic order.
pub(crate) fn for_each_index(r: usize, limit: usize, mut f: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; r];
    loop {
        f(&idx);
        let mut pos = r;
        while pos > 0 {
            pos -= 1;
            if idx[pos] < limit {
                idx[pos] += 1;
                for slot in &mut idx[pos + 1..] {
                    *slot = 0;
                }
                break;
            }
            if pos == 0 {
                return;
            }
        }
    }
}

/// The ε/s/T regime of the sieve's error propagation, with the reference
/// means. `t_limit` is T: the conclusion covers {0,…,T}^r while the
/// hypothesis is checked on the larger box {0,…,r(T+2s)}^r.
#[derive(Debug, Clone)]
pub struct BrunRegime<F> {
    pub epsilon: F,
    pub s: usize,
    pub t_limit: usize,
    pub mus: PoissonParams<F>,
}

impl<F: Scalar> BrunRegime<F> {
    pub fn new(
        epsilon: F,
        s: usize,
        t_limit: usize,
        mus: PoissonParams<F>,
    ) -> Result<Self, SieveError> {
        if !(epsilon > F::zero() && epsilon < F::one()) {
            return Err(SieveError::OutOfRange(crate::spectral::to_f64(epsilon)));
        }
        Ok(Self { epsilon, s, t_limit, mus })
    }

    /// The instantiation used against a graph of n vertices with girth
    /// exponent c: T = ⌊ln n⌋, ε = h = (ln n)^(3−c/2), s = T.
    pub fn walk_preset(n: usize, c: F, mus: PoissonParams<F>) -> Result<Self, SieveError> {
        let ln_n = F::from_count(n).ln();
        let t_limit = crate::spectral::to_f64(ln_n).floor() as usize;
        let two = F::one() + F::one();
        let h = ln_n.powf(F::from_count(3) - c / two);
        Self::new(h, t_limit, t_limit, mus).map(|mut regime| {
            regime.s = t_limit;
            regime
        })
    }

    /// Per-coordinate index bound r(T+2s) of the hypothesis box.
    pub fn box_limit(&self) -> usize {
        self.mus.r() * (self.t_limit + 2 * self.s)
    }

    /// ε′ implied by this regime.
    pub fn epsilon_prime(&self) -> F {
        brun_error(self.epsilon, &self.mus).expect("epsilon validated at construction")
    }
}

/// ε′ = 2·exp(2Σᵢμᵢ)·ε + √ε.
pub fn brun_error<F: Scalar>(epsilon: F, params: &PoissonParams<F>) -> Result<F, SieveError> {
    if !(epsilon >= F::zero() && epsilon < F::one()) {
        return Err(SieveError::OutOfRange(crate::spectral::to_f64(epsilon)));
    }
    let two = F::one() + F::one();
    Ok(two * (two * params.mu_sum()).exp() * epsilon + epsilon.sqrt())
}

/// Outcome of checking the sieve hypothesis against a moment table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BrunReport<F> {
    /// All of the below at once: the sieve's error conclusion applies.
    pub hypothesis_ok: bool,
    /// s > μ.
    pub s_ok: bool,
    /// 2μ^s/s! < ε < (2r·e^μ)^(−2), both strict.
    pub epsilon_window_ok: bool,
    /// max deviation ≤ ε.
    pub moments_ok: bool,
    /// max over the box {0..r(T+2s)}^r of |S(t)/∏ μᵢ^(tᵢ)/tᵢ! − 1|.
    pub max_moment_deviation: F,
    pub epsilon_prime: F,
}

/// Checks the hypothesis of the quantified sieve: s above the mean, ε in
/// its admissible window, and every factorial moment within ε relative of
/// the Poisson reference over the full hypothesis box.
pub fn brun_hypothesis_check<F: Scalar>(
    table: &FactorialMomentTable<F>,
    regime: &BrunRegime<F>,
) -> Result<BrunReport<F>, SieveError> {
    let r = regime.mus.r();
    if table.r() != r {
        return Err(SieveError::DimensionMismatch { expected: r, found: table.r() });
    }
    let limit = regime.box_limit();
    let mut max_dev = F::zero();
    let mut missing: Option<Vec<usize>> = None;
    for_each_index(r, limit, |idx| {
        if missing.is_some() {
            return;
        }
        match table.value(idx) {
            Err(_) => missing = Some(idx.to_vec()),
            Ok(s) => {
                let mut reference = F::one();
                for (&mu, &t) in regime.mus.mus().iter().zip(idx) {
                    reference = reference * poisson_factorial_weight(mu, t);
                }
                max_dev = max_dev.max((s / reference - F::one()).abs());
            }
        }
    });
    if let Some(idx) = missing {
        return Err(SieveError::TableTooSmall { idx });
    }

    let mu = regime.mus.mu_max();
    let s_ok = F::from_count(regime.s) > mu;
    let two = F::one() + F::one();
    let lower = two * poisson_factorial_weight(mu, regime.s);
    let upper = {
        let w = two * F::from_count(r) * mu.exp();
        (w * w).recip()
    };
    let epsilon_window_ok = lower < regime.epsilon && regime.epsilon < upper;
    let moments_ok = max_dev <= regime.epsilon;
    Ok(BrunReport {
        hypothesis_ok: s_ok && epsilon_window_ok && moments_ok,
        s_ok,
        epsilon_window_ok,
        moments_ok,
        max_moment_deviation: max_dev,
        epsilon_prime: regime.epsilon_prime(),
    })
}
