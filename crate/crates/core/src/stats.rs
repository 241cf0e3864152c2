//! Visit-count statistics: the histogram N_t, Poisson reference fractions,
//! the threshold function F, maximal-visit predictions, the balls-and-bins
//! oracle, and comparison reports.

use crate::graph::RegularGraph;
use crate::sieve::poisson_pmf;
use crate::walk::VisitCounts;
use crate::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Debug, thiserror::Error)]
pub enum StatsError {
    #[error("n = {n} is too small, the threshold function needs n ≥ {need}")]
    DomainTooSmall { n: usize, need: usize },
}

/// N(t) = number of counted vertices visited exactly t times.
///
/// With `excluded_radius` = ρ > 0 only vertices at distance ≥ ρ from the
/// walk's start are counted, which removes the start's boosted
/// neighbourhood from the tally; radius 0 counts everything. Merging
/// histograms adds entrywise, so ensembles aggregate associatively.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisitHistogram {
    pub n: usize,
    pub m: usize,
    counts: BTreeMap<usize, u64>,
    pub excluded_radius: usize,
}

impl VisitHistogram {
    fn from_loads(n: usize, m: usize, excluded_radius: usize, loads: impl Iterator<Item = u64>) -> Self {
        let mut counts = BTreeMap::new();
        for load in loads {
            *counts.entry(load as usize).or_insert(0u64) += 1;
        }
        Self { n, m, counts, excluded_radius }
    }

    /// N(t); zero for any t never observed.
    pub fn count(&self, t: usize) -> u64 {
        self.counts.get(&t).copied().unwrap_or(0)
    }

    /// Occupied (t, N(t)) pairs in increasing t.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts.iter().map(|(&t, &c)| (t, c))
    }

    /// Σ_t N(t): how many vertices were tallied.
    pub fn counted_vertices(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Σ_t t·N(t): how many visits landed on tallied vertices.
    pub fn counted_visits(&self) -> u64 {
        self.counts.iter().map(|(&t, &c)| t as u64 * c).sum()
    }

    /// Largest t with N(t) > 0 (0 for an empty histogram).
    pub fn max_visit(&self) -> usize {
        self.counts.keys().next_back().copied().unwrap_or(0)
    }

    /// Entrywise accumulation of another histogram over the same graph
    /// shape and exclusion radius.
    pub fn merge(&mut self, other: &VisitHistogram) {
        assert_eq!(self.n, other.n, "histograms describe different graphs");
        assert_eq!(
            self.excluded_radius, other.excluded_radius,
            "histograms use different exclusion radii"
        );
        self.m += other.m;
        for (t, c) in other.iter() {
            *self.counts.entry(t).or_insert(0) += c;
        }
    }

    /// CSV rows `t,count,fraction,poisson_reference` for every t up to the
    /// largest observed, zero-count gaps included.
    pub fn to_csv<F: Scalar>(&self, mu: F) -> String {
        let total = self.counted_vertices();
        let mut out = String::from("t,count,fraction,poisson_reference\n");
        for t in 0..=self.max_visit() {
            let c = self.count(t);
            let frac = if total == 0 { 0.0 } else { c as f64 / total as f64 };
            let reference = expected_fraction(t, mu);
            let _ = writeln!(out, "{t},{c},{frac},{reference}");
        }
        out
    }
}

/// Tally visit counts over the vertices at distance ≥ `excluded_radius`
/// from the walk's start (BFS metric), all vertices when the radius is 0.
pub fn visit_histogram(
    counts: &VisitCounts,
    g: &RegularGraph,
    excluded_radius: usize,
) -> VisitHistogram {
    let loads = if excluded_radius == 0 {
        counts.counts.iter().copied().collect::<Vec<_>>()
    } else {
        let dist = g.bfs_distances(counts.start);
        counts
            .counts
            .iter()
            .zip(&dist)
            .filter(|&(_, &d)| d as usize >= excluded_radius)
            .map(|(&c, _)| c)
            .collect()
    };
    VisitHistogram::from_loads(
        g.vertex_count(),
        counts.m,
        excluded_radius,
        loads.into_iter(),
    )
}

/// The Poisson reference fraction Pr[Po(μ) = t] = e^(−μ) μ^t / t! that
/// N_t / n converges to.
pub fn expected_fraction<F: Scalar>(t: usize, mu: F) -> F {
    poisson_pmf(mu, t).expect("reference mean must be non-negative")
}

/// F(x) = (1 + x·lnlnln n / lnln n) · (ln n / lnln n), taking ln n
/// directly so astronomically large n stay expressible.
pub fn threshold_from_ln<F: Scalar>(ln_n: F, x: F) -> F {
    let ll = ln_n.ln();
    let lll = ll.ln();
    (F::one() + x * lll / ll) * (ln_n / ll)
}

/// The visit-count threshold function F(x) for a graph on n vertices.
/// Needs n ≥ 16 so that lnlnln n is defined and positive.
pub fn threshold_f<F: Scalar>(n: usize, x: F) -> Result<F, StatsError> {
    if n < 16 {
        return Err(StatsError::DomainTooSmall { n, need: 16 });
    }
    Ok(threshold_from_ln(F::from_count(n).ln(), x))
}

/// Predicted location of the maximal visit count: the center F(1) with the
/// surrounding band [F(1−δ), F(1+δ)].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxVisitPrediction<F> {
    pub center: F,
    pub low: F,
    pub high: F,
}

impl<F: Scalar> MaxVisitPrediction<F> {
    pub fn width(&self) -> F {
        self.high - self.low
    }
}

pub const DEFAULT_PREDICTION_DELTA: f64 = 0.5;

/// Max-visit prediction with the default δ = 0.5 band.
pub fn max_visit_prediction<F: Scalar>(n: usize) -> Result<MaxVisitPrediction<F>, StatsError> {
    max_visit_prediction_with_delta(n, F::from_f64(DEFAULT_PREDICTION_DELTA).expect("delta"))
}

pub fn max_visit_prediction_with_delta<F: Scalar>(
    n: usize,
    delta: F,
) -> Result<MaxVisitPrediction<F>, StatsError> {
    assert!(delta > F::zero(), "band width must be positive");
    Ok(MaxVisitPrediction {
        center: threshold_f(n, F::one())?,
        low: threshold_f(n, F::one() - delta)?,
        high: threshold_f(n, F::one() + delta)?,
    })
}

/// The classical reference experiment: throw `n_balls` balls into `n_bins`
/// bins independently and uniformly, histogram the loads. Deterministic
/// for a given seed.
pub fn balls_and_bins(n_balls: usize, n_bins: usize, seed: u64) -> VisitHistogram {
    assert!(n_bins >= 1, "need at least one bin");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut loads = vec![0u64; n_bins];
    for _ in 0..n_balls {
        loads[rng.gen_range(0..n_bins)] += 1;
    }
    VisitHistogram::from_loads(n_bins, n_balls, 0, loads.into_iter())
}

/// How an empirical visit histogram compares to the Poisson law Po(μ):
/// signed relative deviations of N(t)/counted from e^(−μ)μ^t/t! for
/// t ≤ t_range, the total-variation distance (Poisson tail included), the
/// largest observed visit count, and the asymptotic prediction band for it
/// (absent when the graph is too small for the threshold function).
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport<F> {
    pub deviations: Vec<F>,
    pub tv_distance: F,
    pub max_visit_observed: usize,
    pub predicted: Option<MaxVisitPrediction<F>>,
}

pub fn compare_to_poisson<F: Scalar>(
    hist: &VisitHistogram,
    mu: F,
    t_range: usize,
) -> ComparisonReport<F> {
    assert!(t_range >= 1, "need at least one deviation row");
    let total = hist.counted_vertices();
    let total_f = if total == 0 { F::one() } else { F::from_f64(total as f64).expect("count") };
    let deviations = (0..=t_range)
        .map(|t| {
            let observed = F::from_f64(hist.count(t) as f64).expect("count") / total_f;
            observed / expected_fraction(t, mu) - F::one()
        })
        .collect();

    let mut tv = F::zero();
    let mut reference_seen = F::zero();
    for t in 0..=hist.max_visit() {
        let observed = F::from_f64(hist.count(t) as f64).expect("count") / total_f;
        let reference = expected_fraction(t, mu);
        reference_seen = reference_seen + reference;
        tv = tv + (observed - reference).abs();
    }
    // the Poisson mass beyond the observed support counts in full
    let tail = (F::one() - reference_seen).max(F::zero());
    let two = F::one() + F::one();
    let tv_distance = ((tv + tail) / two).min(F::one());

    ComparisonReport {
        deviations,
        tv_distance,
        max_visit_observed: hist.max_visit(),
        predicted: max_visit_prediction(hist.n).ok(),
    }
}
