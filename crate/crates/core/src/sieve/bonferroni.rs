//! The multivariate Bonferroni sandwich.
//!
//! Λ(k) = Σ_{t=Σm}^{Σm+k} Σ_{Σiⱼ=t} (−1)^(t−Σm) (∏ⱼ C(iⱼ,mⱼ)) S^(i₁..i_r)
//!
//! truncating inclusion–exclusion after k layers; odd truncations bound
//! Pr[∩ Xⱼ = mⱼ] from below, even ones from above.

use super::{FactorialMomentTable, SieveError};
use crate::scalar::CompensatedSum;
use crate::Scalar;
use serde::Serialize;

/// Λ(0..=kmax) with the resulting bracket: `lower` is the best odd-depth
/// partial sum, `upper` the best even-depth one.
#[derive(Debug, Clone, Serialize)]
pub struct SieveBounds<F> {
    pub m: Vec<usize>,
    pub lambda: Vec<F>,
    pub lower: F,
    pub upper: F,
}

/// Visit every composition of `total` into `r` non-negative parts,
/// lexicographically: the first r−1 coordinates run over {sum ≤ total}
/// like an odometer with a shared budget, the last absorbs the remainder.
fn for_each_composition(total: usize, r: usize, mut f: impl FnMut(&[usize])) {
    let mut buf = vec![0usize; r];
    let mut head_sum = 0usize;
    loop {
        buf[r - 1] = total - head_sum;
        f(&buf);
        let mut pos = r - 1;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if head_sum < total {
                buf[pos] += 1;
                head_sum += 1;
                break;
            }
            head_sum -= buf[pos];
            buf[pos] = 0;
        }
    }
}

/// C(m+a, m) as a float; small exact integers at the depths in play.
fn binomial_shift<F: Scalar>(m: usize, a: usize) -> F {
    let mut c = F::one();
    for j in 0..a {
        c = c * F::from_count(m + j + 1) / F::from_count(j + 1);
    }
    c
}

/// Λ(u) for u = 0..=kmax in one pass over the simplex layers, each layer
/// and the running alternating sum accumulated with compensation.
fn lambda_sequence<F: Scalar>(
    table: &FactorialMomentTable<F>,
    m: &[usize],
    kmax: usize,
) -> Result<Vec<F>, SieveError> {
    if m.len() != table.r() {
        return Err(SieveError::DimensionMismatch { expected: table.r(), found: m.len() });
    }
    for (pos, &mj) in m.iter().enumerate() {
        if mj + kmax > table.tmax() {
            let mut idx = m.to_vec();
            idx[pos] = mj + kmax;
            return Err(SieveError::TableTooSmall { idx });
        }
    }
    let mut out = Vec::with_capacity(kmax + 1);
    let mut running = CompensatedSum::<F>::default();
    let mut idx = vec![0usize; m.len()];
    for u in 0..=kmax {
        let mut layer = CompensatedSum::<F>::default();
        let mut missing = None;
        for_each_composition(u, m.len(), |shift| {
            if missing.is_some() {
                return;
            }
            let mut coeff = F::one();
            for ((slot, &mj), &aj) in idx.iter_mut().zip(m).zip(shift) {
                *slot = mj + aj;
                coeff = coeff * binomial_shift::<F>(mj, aj);
            }
            match table.value(&idx) {
                Ok(s) => layer.add(coeff * s),
                Err(_) => missing = Some(idx.clone()),
            }
        });
        if let Some(idx) = missing {
            return Err(SieveError::TableTooSmall { idx });
        }
        let signed = if u % 2 == 0 { layer.value() } else { -layer.value() };
        running.add(signed);
        out.push(running.value());
    }
    Ok(out)
}

/// The k-th Bonferroni partial sum Λ(k) around the target tuple m.
pub fn bonferroni_lambda<F: Scalar>(
    table: &FactorialMomentTable<F>,
    m: &[usize],
    k: usize,
) -> Result<F, SieveError> {
    Ok(*lambda_sequence(table, m, k)?.last().expect("k+1 entries"))
}

/// The full sandwich up to depth kmax ≥ 1:
/// max odd Λ ≤ Pr[∩ Xⱼ = mⱼ] ≤ min even Λ for any true moment table.
pub fn bonferroni_bounds<F: Scalar>(
    table: &FactorialMomentTable<F>,
    m: &[usize],
    kmax: usize,
) -> Result<SieveBounds<F>, SieveError> {
    assert!(kmax >= 1, "need at least one odd depth for a lower bound");
    let lambda = lambda_sequence(table, m, kmax)?;
    let lower = lambda
        .iter()
        .skip(1)
        .step_by(2)
        .copied()
        .fold(F::neg_infinity(), F::max);
    let upper = lambda
        .iter()
        .step_by(2)
        .copied()
        .fold(F::infinity(), F::min);
    Ok(SieveBounds { m: m.to_vec(), lambda, lower, upper })
}
