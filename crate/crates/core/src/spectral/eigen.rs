//! Eigenvalue backends: dense cyclic Jacobi for small graphs, deflated
//! power iteration for everything else.

use super::SpectralError;
use crate::graph::RegularGraph;
use crate::Scalar;

/// Largest n that goes through the dense path.
pub(crate) const DENSE_LIMIT: usize = 512;

const MAX_SWEEPS: usize = 60;
const MAX_POWER_ITERS: usize = 100_000;

/// λ from the full dense spectrum: sort, drop one copy of the trivial
/// eigenvalue d, take the largest remaining magnitude.
pub(crate) fn lambda_dense<F: Scalar>(g: &RegularGraph, tol: F) -> Result<F, SpectralError> {
    let n = g.vertex_count();
    let mut a = vec![F::zero(); n * n];
    for u in 0..n {
        for &v in g.neighbors(u as u32) {
            a[u * n + v as usize] = F::one();
        }
    }
    let mut evals = jacobi_eigenvalues(&mut a, n, tol)?;
    evals.sort_by(|x, y| y.partial_cmp(x).expect("eigenvalues are finite"));
    let lambda = evals[1..]
        .iter()
        .map(|e| e.abs())
        .fold(F::zero(), F::max);
    Ok(lambda)
}

/// Eigenvalues of a symmetric matrix (row-major, destroyed) by cyclic Jacobi
/// rotations. Converges when the off-diagonal Frobenius norm falls below
/// `tol` times the full Frobenius norm.
pub(crate) fn jacobi_eigenvalues<F: Scalar>(
    a: &mut [F],
    n: usize,
    tol: F,
) -> Result<Vec<F>, SpectralError> {
    assert_eq!(a.len(), n * n);
    if n == 1 {
        return Ok(vec![a[0]]);
    }
    let scale = frobenius(a);
    if scale == F::zero() {
        return Ok(vec![F::zero(); n]);
    }
    let target = scale * tol;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(a, n) <= target {
            return Ok((0..n).map(|i| a[i * n + i]).collect());
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == F::zero() {
                    continue;
                }
                // rotation angle zeroing a[p][q]; hypot avoids overflow
                // when apq is many orders below the diagonal gap
                let theta = (a[q * n + q] - a[p * n + p]) / (apq + apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(F::one()));
                let c = (t * t + F::one()).sqrt().recip();
                let s = t * c;
                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[p * n + i] = a[i * n + p];
                    a[i * n + q] = s * aip + c * aiq;
                    a[q * n + i] = a[i * n + q];
                }
                a[p * n + p] = a[p * n + p] - t * apq;
                a[q * n + q] = a[q * n + q] + t * apq;
                a[p * n + q] = F::zero();
                a[q * n + p] = F::zero();
            }
        }
    }
    Err(SpectralError::NoConvergence { iters: MAX_SWEEPS })
}

fn frobenius<F: Scalar>(a: &[F]) -> F {
    a.iter().map(|&x| x * x).sum::<F>().sqrt()
}

fn off_diagonal_norm<F: Scalar>(a: &[F], n: usize) -> F {
    let mut acc = F::zero();
    for i in 0..n {
        for j in i + 1..n {
            let x = a[i * n + j];
            acc = acc + x * x + x * x;
        }
    }
    acc.sqrt()
}

/// λ by power iteration on B², where B = A − (d/n)·J is the adjacency
/// operator deflated against the all-ones eigenvector. Squaring folds the
/// ±λ pair of near-bipartite graphs into a single dominant eigenvalue λ²,
/// so the Rayleigh quotient converges regardless of sign structure.
pub(crate) fn lambda_power<F: Scalar>(g: &RegularGraph, tol: F) -> Result<F, SpectralError> {
    let n = g.vertex_count();
    let mut x = seed_vector::<F>(n, 0x9e3779b97f4a7c15);
    let mut y = vec![F::zero(); n];
    let mut z = vec![F::zero(); n];
    remove_mean(&mut x);
    normalize(&mut x);
    let mut prev = F::nan();
    for it in 0..MAX_POWER_ITERS {
        deflated_matvec(g, &x, &mut y);
        deflated_matvec(g, &y, &mut z);
        // x'B²x = ‖Bx‖² for symmetric B and unit x
        let lambda_sq = y.iter().map(|&v| v * v).sum::<F>();
        let lambda = lambda_sq.max(F::zero()).sqrt();
        if (lambda - prev).abs() <= tol {
            return Ok(lambda);
        }
        prev = lambda;
        remove_mean(&mut z);
        let norm = normalize(&mut z);
        if norm <= F::min_positive_value().sqrt() {
            // start vector fell into the kernel of B²; reseed and go on
            x = seed_vector::<F>(n, 0xd1b54a32d192ed03 ^ it as u64);
            remove_mean(&mut x);
            normalize(&mut x);
            continue;
        }
        std::mem::swap(&mut x, &mut z);
    }
    Err(SpectralError::NoConvergence { iters: MAX_POWER_ITERS })
}

/// y = A·x − (d/n)·(Σx)·1, evaluated matrix-free in O(n·d).
fn deflated_matvec<F: Scalar>(g: &RegularGraph, x: &[F], y: &mut [F]) {
    let n = g.vertex_count();
    let shift =
        x.iter().copied().sum::<F>() * F::from_count(g.degree()) / F::from_count(n);
    for u in 0..n {
        let mut acc = F::zero();
        for &v in g.neighbors(u as u32) {
            acc = acc + x[v as usize];
        }
        y[u] = acc - shift;
    }
}

/// Deterministic quasi-random start vector (splitmix-style bit mix), so the
/// iteration is reproducible everywhere without touching an RNG.
fn seed_vector<F: Scalar>(n: usize, salt: u64) -> Vec<F> {
    (0..n as u64)
        .map(|i| {
            let mut z = i.wrapping_add(salt);
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z ^= z >> 31;
            // map to (-0.5, 0.5)
            F::from_f64((z >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
                .expect("seed component in range")
        })
        .collect()
}

fn remove_mean<F: Scalar>(x: &mut [F]) {
    let mean = x.iter().copied().sum::<F>() / F::from_count(x.len());
    for v in x.iter_mut() {
        *v = *v - mean;
    }
}

fn normalize<F: Scalar>(x: &mut [F]) -> F {
    let norm = x.iter().map(|&v| v * v).sum::<F>().sqrt();
    if norm > F::zero() {
        for v in x.iter_mut() {
            *v = *v / norm;
        }
    }
    norm
}
