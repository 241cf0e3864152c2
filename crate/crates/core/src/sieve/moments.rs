//! Joint pmfs on finite grids and their factorial moment tables
//! S^(i₁..i_r) = E[∏ⱼ C(Xⱼ, iⱼ)], exact or Monte Carlo estimated.

use super::{for_each_index, poisson_factorial_weight, PoissonParams, SieveError};
use crate::scalar::CompensatedSum;
use crate::Scalar;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Caps under which the log-space Monte Carlo path cannot overflow.
const MAX_COUNT: u64 = 1_000_000;
const MAX_MOMENT_ORDER: usize = 64;

/// A joint pmf with finite support on r-tuples of non-negative integers.
/// Duplicate atoms are merged; total mass must be 1 up to rounding slack.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf<F> {
    r: usize,
    atoms: BTreeMap<Vec<usize>, F>,
}

impl<F: Scalar> JointPmf<F> {
    pub fn new(
        r: usize,
        atoms: impl IntoIterator<Item = (Vec<usize>, F)>,
    ) -> Result<Self, SieveError> {
        assert!(r >= 1, "need at least one coordinate");
        let mut merged: BTreeMap<Vec<usize>, F> = BTreeMap::new();
        for (idx, p) in atoms {
            if idx.len() != r {
                return Err(SieveError::DimensionMismatch { expected: r, found: idx.len() });
            }
            if !(p >= F::zero()) {
                return Err(SieveError::NotAPmf(format!(
                    "negative mass {p} at {idx:?}"
                )));
            }
            let slot = merged.entry(idx).or_insert_with(F::zero);
            *slot = *slot + p;
        }
        let total = merged.values().copied().sum::<F>();
        // slack floor keeps f32 workable; for f64 this is the nominal 1e-9
        let slack = F::from_f64(1e-9)
            .expect("slack constant")
            .max(F::epsilon() * F::from_count(8 * (merged.len() + 1)));
        if (total - F::one()).abs() > slack {
            return Err(SieveError::NotAPmf(format!("total mass {total}")));
        }
        Ok(Self { r, atoms: merged })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn prob(&self, idx: &[usize]) -> F {
        self.atoms.get(idx).copied().unwrap_or_else(F::zero)
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&[usize], F)> {
        self.atoms.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    /// Joint law of two independent blocks: (X, Y) with X ~ self, Y ~ other.
    pub fn product(&self, other: &JointPmf<F>) -> JointPmf<F> {
        let mut atoms = BTreeMap::new();
        for (xi, px) in self.atoms() {
            for (yi, py) in other.atoms() {
                let mut idx = xi.to_vec();
                idx.extend_from_slice(yi);
                atoms.insert(idx, px * py);
            }
        }
        JointPmf { r: self.r + other.r, atoms }
    }
}

/// One table cell: the moment value, and a standard error when estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEntry<F> {
    pub value: F,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<F>,
}

/// Factorial moments indexed by tuples (i₁,…,i_r) with every iⱼ ≤ tmax.
/// Tables may be partial (for example when read from a file); consumers
/// get `TableTooSmall` on access to anything absent.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorialMomentTable<F> {
    r: usize,
    tmax: usize,
    entries: BTreeMap<Vec<usize>, MomentEntry<F>>,
}

impl<F: Scalar> FactorialMomentTable<F> {
    pub fn from_entries(
        r: usize,
        tmax: usize,
        entries: impl IntoIterator<Item = (Vec<usize>, MomentEntry<F>)>,
    ) -> Result<Self, SieveError> {
        assert!(r >= 1, "need at least one coordinate");
        let mut map = BTreeMap::new();
        for (idx, entry) in entries {
            if idx.len() != r {
                return Err(SieveError::DimensionMismatch { expected: r, found: idx.len() });
            }
            if idx.iter().any(|&i| i > tmax) {
                return Err(SieveError::TableTooSmall { idx });
            }
            map.insert(idx, entry);
        }
        Ok(Self { r, tmax, entries: map })
    }

    /// The exact table of r independent Poisson variables:
    /// S(i₁..i_r) = ∏ⱼ μⱼ^(iⱼ)/iⱼ!.
    pub fn from_poisson(params: &PoissonParams<F>, tmax: usize) -> Self {
        let r = params.r();
        let mut entries = BTreeMap::new();
        for_each_index(r, tmax, |idx| {
            let mut w = F::one();
            for (&mu, &i) in params.mus().iter().zip(idx) {
                w = w * poisson_factorial_weight(mu, i);
            }
            entries.insert(idx.to_vec(), MomentEntry { value: w, stderr: None });
        });
        Self { r, tmax, entries }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn tmax(&self) -> usize {
        self.tmax
    }

    pub fn value(&self, idx: &[usize]) -> Result<F, SieveError> {
        if idx.len() != self.r {
            return Err(SieveError::DimensionMismatch { expected: self.r, found: idx.len() });
        }
        self.entries
            .get(idx)
            .map(|e| e.value)
            .ok_or_else(|| SieveError::TableTooSmall { idx: idx.to_vec() })
    }

    pub fn entry(&self, idx: &[usize]) -> Option<&MomentEntry<F>> {
        self.entries.get(idx)
    }

    /// Entries in lexicographic index order.
    pub fn entries(&self) -> impl Iterator<Item = (&[usize], &MomentEntry<F>)> {
        self.entries.iter().map(|(k, v)| (k.as_slice(), v))
    }
}

#[derive(Serialize, Deserialize)]
struct TableRepr<F> {
    r: usize,
    tmax: usize,
    entries: Vec<EntryRepr<F>>,
}

#[derive(Serialize, Deserialize)]
struct EntryRepr<F> {
    idx: Vec<usize>,
    value: F,
    #[serde(skip_serializing_if = "Option::is_none")]
    stderr: Option<F>,
}

impl<F: Scalar + Serialize> FactorialMomentTable<F> {
    pub fn to_json(&self) -> String {
        let repr = TableRepr {
            r: self.r,
            tmax: self.tmax,
            entries: self
                .entries()
                .map(|(idx, e)| EntryRepr { idx: idx.to_vec(), value: e.value, stderr: e.stderr })
                .collect(),
        };
        serde_json::to_string_pretty(&repr).expect("moment table serializes")
    }
}

impl<F: Scalar + serde::de::DeserializeOwned> FactorialMomentTable<F> {
    pub fn from_json(text: &str) -> Result<Self, SieveError> {
        let repr: TableRepr<F> = serde_json::from_str(text)
            .map_err(|e| SieveError::NotAPmf(format!("bad moment table JSON: {e}")))?;
        Self::from_entries(
            repr.r,
            repr.tmax,
            repr.entries
                .into_iter()
                .map(|e| (e.idx, MomentEntry { value: e.value, stderr: e.stderr })),
        )
    }
}

/// C(x, i) by the multiplicative recurrence, exact up to float rounding.
fn binomial_direct<F: Scalar>(x: usize, i: usize) -> F {
    if i > x {
        return F::zero();
    }
    let mut c = F::one();
    for j in 0..i {
        c = c * F::from_count(x - j) / F::from_count(j + 1);
    }
    c
}

/// Exact factorial moments of an explicit joint pmf:
/// S(i₁..i_r) = Σ_atoms p(x) ∏ⱼ C(xⱼ, iⱼ).
pub fn factorial_moments_exact<F: Scalar>(
    pmf: &JointPmf<F>,
    tmax: usize,
) -> Result<FactorialMomentTable<F>, SieveError> {
    let r = pmf.r();
    let mut entries = BTreeMap::new();
    let mut overflowed = false;
    for_each_index(r, tmax, |idx| {
        let mut acc = CompensatedSum::<F>::default();
        for (x, p) in pmf.atoms() {
            let mut prod = p;
            for (&xj, &ij) in x.iter().zip(idx) {
                prod = prod * binomial_direct(xj, ij);
                if prod == F::zero() {
                    break;
                }
            }
            acc.add(prod);
        }
        let value = acc.value();
        if !value.is_finite() {
            overflowed = true;
        }
        entries.insert(idx.to_vec(), MomentEntry { value, stderr: None });
    });
    if overflowed {
        return Err(SieveError::OverflowRisk(
            "factorial moment exceeds the float range".into(),
        ));
    }
    Ok(FactorialMomentTable { r, tmax, entries })
}

/// Streaming log-sum-exp accumulator: never exponentiates anything larger
/// than the running maximum, so partial sums of huge terms stay finite.
struct LogSum<F> {
    max: F,
    sum: F,
}

impl<F: Scalar> LogSum<F> {
    fn new() -> Self {
        Self { max: F::neg_infinity(), sum: F::zero() }
    }

    fn push(&mut self, z: F) {
        if z == F::neg_infinity() {
            return; // a zero term
        }
        if z <= self.max {
            self.sum = self.sum + (z - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - z).exp() + F::one();
            self.max = z;
        }
    }

    /// ln of the accumulated sum (−∞ when empty).
    fn ln_value(&self) -> F {
        if self.sum == F::zero() {
            F::neg_infinity()
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// Monte Carlo factorial moments of an ensemble of observed count tuples:
/// per index tuple, the sample mean of ∏ⱼ C(xⱼ, iⱼ) with its standard
/// error. Binomials run in log-space under hard caps (counts ≤ 10⁶,
/// orders ≤ 64), so individual products may dwarf the float range as long
/// as the final moments do not.
pub fn factorial_moments_mc<F: Scalar>(
    ensemble: &[Vec<u64>],
    tmax: usize,
) -> Result<FactorialMomentTable<F>, SieveError> {
    let Some(first) = ensemble.first() else {
        return Err(SieveError::EmptyEnsemble);
    };
    let r = first.len();
    assert!(r >= 1, "need at least one coordinate");
    if tmax > MAX_MOMENT_ORDER {
        return Err(SieveError::OverflowRisk(format!(
            "moment order {tmax} beyond the supported cap {MAX_MOMENT_ORDER}"
        )));
    }

    // one pair of accumulators (for the mean and the mean of squares)
    // per index tuple, in lexicographic layout
    let cells = (tmax + 1).pow(r as u32);
    let mut sums: Vec<LogSum<F>> = (0..cells).map(|_| LogSum::new()).collect();
    let mut sq_sums: Vec<LogSum<F>> = (0..cells).map(|_| LogSum::new()).collect();
    // scratch: ln C(x_j, i) per coordinate and order
    let mut ln_binom = vec![F::zero(); r * (tmax + 1)];

    for tuple in ensemble {
        if tuple.len() != r {
            return Err(SieveError::DimensionMismatch { expected: r, found: tuple.len() });
        }
        for (j, &x) in tuple.iter().enumerate() {
            if x > MAX_COUNT {
                return Err(SieveError::OverflowRisk(format!(
                    "count {x} beyond the supported cap {MAX_COUNT}"
                )));
            }
            // ln C(x, i+1) = ln C(x, i) + ln(x − i) − ln(i + 1)
            let row = &mut ln_binom[j * (tmax + 1)..(j + 1) * (tmax + 1)];
            row[0] = F::zero();
            for i in 0..tmax {
                row[i + 1] = if (i as u64) >= x {
                    F::neg_infinity()
                } else {
                    row[i] + F::from_f64((x - i as u64) as f64).expect("count fits").ln()
                        - F::from_count(i + 1).ln()
                };
            }
        }
        let mut flat = 0usize;
        for_each_index(r, tmax, |idx| {
            let mut z = F::zero();
            for (j, &i) in idx.iter().enumerate() {
                z = z + ln_binom[j * (tmax + 1) + i];
            }
            sums[flat].push(z);
            sq_sums[flat].push(z + z);
            flat += 1;
        });
    }

    let count = F::from_count(ensemble.len());
    let ln_count = count.ln();
    let max_exp = F::max_value().ln();
    let mut entries = BTreeMap::new();
    let mut flat = 0usize;
    let mut overflow = None;
    for_each_index(r, tmax, |idx| {
        let ln_mean = sums[flat].ln_value() - ln_count;
        let ln_mean_sq = sq_sums[flat].ln_value() - ln_count;
        if ln_mean > max_exp || ln_mean_sq > max_exp {
            overflow.get_or_insert_with(|| idx.to_vec());
        }
        let mean = ln_mean.exp();
        let stderr = (ensemble.len() >= 2).then(|| {
            let mean_sq = ln_mean_sq.exp();
            let var = (mean_sq - mean * mean).max(F::zero()) * count / (count - F::one());
            (var / count).sqrt()
        });
        entries.insert(idx.to_vec(), MomentEntry { value: mean, stderr });
        flat += 1;
    });
    if let Some(idx) = overflow {
        return Err(SieveError::OverflowRisk(format!(
            "moment at {idx:?} exceeds the float range"
        )));
    }
    Ok(FactorialMomentTable { r, tmax, entries })
}
