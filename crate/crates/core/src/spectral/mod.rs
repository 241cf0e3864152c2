//! Exact spectral and mixing quantities for regular graphs.
//!
//! Houses the nontrivial adjacency eigenvalue λ, the NBRW mixing rate
//! ρ = ψ(λ/(2√(d−1)))/√(d−1), exact k-step walk laws via the directed-edge
//! transition operator, the fine mixing time τ, and the short-return mass M.

mod eigen;
mod nbrw;

pub use nbrw::{
    fine_mixing_time_tau, nbrw_k_step_vertex_distribution, short_return_mass_M, EdgeDistribution,
    MixingReport, VertexDistribution, DEFAULT_HORIZON,
};

use crate::graph::RegularGraph;
use crate::Scalar;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum SpectralError {
    #[error("psi is undefined for negative input {0}")]
    NegativeInput(f64),
    #[error("degree {d} too small, need at least {need}")]
    DegreeTooSmall { d: usize, need: usize },
    #[error("lambda {lambda} outside [0, d] for d = {d}")]
    LambdaOutOfRange { lambda: f64, d: usize },
    #[error("tolerance {0} must lie in (0, 1)")]
    BadTolerance(f64),
    #[error("eigensolver did not converge within {iters} iterations")]
    NoConvergence { iters: usize },
    #[error("graph is bipartite or disconnected; the walk does not mix")]
    BipartiteOrDisconnected,
    #[error("k = {k} exceeds the configured horizon {horizon}")]
    HorizonExceeded { k: usize, horizon: usize },
    #[error("vertex {start} out of range for n = {n}")]
    BadStart { start: u32, n: usize },
    #[error("target list is empty")]
    EmptyTargets,
}

/// Maximal absolute nontrivial adjacency eigenvalue of a `d`-regular graph,
/// together with the tolerance it was computed to.
///
/// `lambda == d` (within `tol·d`) signals a disconnected or bipartite graph:
/// the trivial eigenvalue `d` is then not simple, or `−d` is present.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumSummary<F> {
    pub d: usize,
    pub lambda: F,
    pub tol: F,
}

impl<F: Scalar> SpectrumSummary<F> {
    /// Whether the spectral gap d − λ is resolvable at this tolerance.
    /// When it is not, the mixing operations refuse.
    pub fn has_gap(&self) -> bool {
        let d = F::from_count(self.d);
        self.lambda < d * (F::one() - self.tol)
    }
}

/// Default eigensolver tolerance: 1e−9, floored at 100 machine epsilons so
/// the stop rule stays reachable in f32.
pub fn default_tolerance<F: Scalar>() -> F {
    let nominal = F::from_f64(1e-9).expect("tolerance constant");
    nominal.max(F::epsilon() * F::from_count(100))
}

/// ψ(x) = 1 for 0 ≤ x ≤ 1, and x + √(x²−1) above; the function through
/// which λ determines the mixing rate.
pub fn psi<F: Scalar>(x: F) -> Result<F, SpectralError> {
    if x < F::zero() {
        return Err(SpectralError::NegativeInput(to_f64(x)));
    }
    if x <= F::one() {
        Ok(F::one())
    } else {
        Ok(x + (x * x - F::one()).sqrt())
    }
}

/// NBRW mixing rate ρ = ψ(λ / (2√(d−1))) / √(d−1).
pub fn mixing_rate_rho<F: Scalar>(d: usize, lambda: F) -> Result<F, SpectralError> {
    check_d_lambda(d, lambda)?;
    let sq = F::from_count(d - 1).sqrt();
    let x = lambda / (sq + sq);
    Ok(psi(x)? / sq)
}

/// The closed-form bound ρ ≤ max{λ/d, 1/√(d−1)}.
pub fn rho_upper_bound<F: Scalar>(d: usize, lambda: F) -> Result<F, SpectralError> {
    check_d_lambda(d, lambda)?;
    let a = lambda / F::from_count(d);
    let b = F::from_count(d - 1).sqrt().recip();
    Ok(a.max(b))
}

fn check_d_lambda<F: Scalar>(d: usize, lambda: F) -> Result<(), SpectralError> {
    if d < 3 {
        return Err(SpectralError::DegreeTooSmall { d, need: 3 });
    }
    if lambda < F::zero() || lambda > F::from_count(d) {
        return Err(SpectralError::LambdaOutOfRange { lambda: to_f64(lambda), d });
    }
    Ok(())
}

/// λ = max_{i>1} |λ_i|: the largest absolute eigenvalue of the adjacency
/// matrix once one copy of the trivial eigenvalue d is removed.
///
/// Below 512 vertices the full symmetric spectrum is computed densely
/// (cyclic Jacobi); above, power iteration on the square of the adjacency
/// operator deflated against the all-ones vector, stopping when successive
/// estimates differ by at most `tol`.
pub fn second_eigenvalue<F: Scalar>(
    g: &RegularGraph,
    tol: F,
) -> Result<SpectrumSummary<F>, SpectralError> {
    if tol <= F::zero() || tol >= F::one() {
        return Err(SpectralError::BadTolerance(to_f64(tol)));
    }
    let lambda = if g.vertex_count() <= eigen::DENSE_LIMIT {
        eigen::lambda_dense(g, tol)?
    } else {
        eigen::lambda_power(g, tol)?
    };
    // rounding may push the estimate a hair past the Perron value
    let lambda = lambda.min(F::from_count(g.degree()));
    Ok(SpectrumSummary { d: g.degree(), lambda, tol })
}

pub(crate) fn to_f64<F: Scalar>(x: F) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named_graph;

    #[test]
    fn psi_branches() {
        assert_eq!(psi(0.5f64).unwrap(), 1.0);
        assert_eq!(psi(1.0f64).unwrap(), 1.0);
        assert_eq!(psi(1.25f64).unwrap(), 2.0); // 1.25 + sqrt(0.5625), exact
        assert!(matches!(psi(-0.1f64), Err(SpectralError::NegativeInput(_))));
    }

    #[test]
    fn rho_examples() {
        let r = mixing_rate_rho(3, 2.0f64).unwrap();
        assert!((r - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(mixing_rate_rho(5, 4.0f64).unwrap(), 0.5);
        for d in 3..=10usize {
            let r0 = mixing_rate_rho(d, 0.0f64).unwrap();
            assert!((r0 - 1.0 / ((d - 1) as f64).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn rho_bound_examples() {
        assert_eq!(rho_upper_bound(5, 4.0f64).unwrap(), 0.8);
        let b = rho_upper_bound(3, 2.0f64).unwrap();
        assert!((b - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn preconditions_are_enforced() {
        assert!(matches!(
            mixing_rate_rho(2, 1.0f64),
            Err(SpectralError::DegreeTooSmall { d: 2, need: 3 })
        ));
        assert!(matches!(
            mixing_rate_rho(3, 3.5f64),
            Err(SpectralError::LambdaOutOfRange { .. })
        ));
        assert!(matches!(
            mixing_rate_rho(3, -0.5f64),
            Err(SpectralError::LambdaOutOfRange { .. })
        ));
        let g = named_graph("k4").unwrap();
        assert!(matches!(
            second_eigenvalue::<f64>(&g, 1.5),
            Err(SpectralError::BadTolerance(_))
        ));
    }

    #[test]
    fn lambda_of_named_graphs() {
        // K4 spectrum {3, -1, -1, -1}; Petersen {3, 1^5, (-2)^4};
        // K33 and Q3 are bipartite so lambda = d.
        let cases = [("k4", 1.0), ("petersen", 2.0), ("k33", 3.0), ("q3", 3.0)];
        for (name, want) in cases {
            let g = named_graph(name).unwrap();
            let s = second_eigenvalue::<f64>(&g, 1e-10).unwrap();
            assert!((s.lambda - want).abs() < 1e-8, "{name}: {} vs {want}", s.lambda);
        }
    }

    #[test]
    fn gap_detection() {
        let bip = second_eigenvalue::<f64>(&named_graph("k33").unwrap(), 1e-9).unwrap();
        assert!(!bip.has_gap());
        let pet = second_eigenvalue::<f64>(&named_graph("petersen").unwrap(), 1e-9).unwrap();
        assert!(pet.has_gap());
    }

    #[test]
    fn works_in_f32() {
        let g = named_graph("petersen").unwrap();
        let s = second_eigenvalue::<f32>(&g, 1e-4).unwrap();
        assert!((s.lambda - 2.0).abs() < 1e-3);
        let r = mixing_rate_rho(3, s.lambda).unwrap();
        let b = rho_upper_bound(3, s.lambda).unwrap();
        assert!(r <= b + f32::EPSILON);
    }
}
