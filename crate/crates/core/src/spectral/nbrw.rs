//! Exact k-step NBRW laws through the directed-edge transition operator.
//!
//! A distribution over the n·d directed edges is advanced one step at a
//! time: mass on (u,v) spreads as 1/(d−1) onto every (v,w) with w ≠ u.
//! Propagating dense edge vectors keeps a k-step law at O(k·n·d) time and
//! O(n·d) space without ever forming the (n·d)² operator.

use super::{default_tolerance, mixing_rate_rho, second_eigenvalue, SpectralError};
use crate::graph::RegularGraph;
use crate::Scalar;
use rayon::prelude::*;
use serde::Serialize;

/// Cap on k for a single exact k-step law.
pub const DEFAULT_HORIZON: usize = 100_000;

/// Probability vector over directed edges; entry `u*d + slot` is the mass
/// on the edge from `u` to its `slot`-th sorted neighbor.
#[derive(Debug, Clone)]
pub struct EdgeDistribution<'g, F> {
    graph: &'g RegularGraph,
    probs: Vec<F>,
    scratch: Vec<F>,
}

impl<'g, F: Scalar> EdgeDistribution<'g, F> {
    /// Law after the first step from `start`: mass 1/d on each out-edge.
    pub fn first_step(graph: &'g RegularGraph, start: u32) -> Result<Self, SpectralError> {
        if !graph.contains_vertex(start) {
            return Err(SpectralError::BadStart { start, n: graph.vertex_count() });
        }
        let d = graph.degree();
        let mut probs = vec![F::zero(); graph.directed_edge_count()];
        let w = F::from_count(d).recip();
        for slot in probs[start as usize * d..].iter_mut().take(d) {
            *slot = w;
        }
        Ok(Self { graph, scratch: vec![F::zero(); probs.len()], probs })
    }

    pub fn graph(&self) -> &'g RegularGraph {
        self.graph
    }

    pub fn probs(&self) -> &[F] {
        &self.probs
    }

    /// One non-backtracking edge step.
    ///
    /// next(v,w) = (S_v − cur(w,v)) / (d−1), where S_v is the total mass on
    /// v's in-edges: every in-edge contributes except the reversal. The
    /// subtraction never manufactures mass on actually-unreachable edges
    /// (summing exact zeros is exact), so entries below girth/distance stay
    /// identically zero.
    pub fn step(&mut self) {
        let g = self.graph;
        let d = g.degree();
        let inv = F::from_count(d - 1).recip();
        debug_assert!(d >= 3, "the edge step needs d >= 3");
        for v in 0..g.vertex_count() {
            let base = v * d;
            let mut arriving = F::zero();
            for j in 0..d {
                arriving = arriving + self.probs[self.in_edge(v, j)];
            }
            for j in 0..d {
                self.scratch[base + j] = (arriving - self.probs[self.in_edge(v, j)]) * inv;
            }
        }
        std::mem::swap(&mut self.probs, &mut self.scratch);
    }

    /// Flat index of the in-edge of `v` arriving from its `j`-th neighbor.
    #[inline]
    fn in_edge(&self, v: usize, j: usize) -> usize {
        let e = v * self.graph.degree() + j;
        self.graph.edge_head(e) as usize * self.graph.degree() + self.graph.reciprocal_slot(e)
    }

    /// Sum mass onto head vertices.
    pub fn vertex_marginal(&self) -> VertexDistribution<F> {
        let g = self.graph;
        let d = g.degree();
        let probs = (0..g.vertex_count())
            .map(|v| (0..d).map(|j| self.probs[self.in_edge(v, j)]).sum())
            .collect();
        VertexDistribution { probs }
    }

    pub fn total_mass(&self) -> F {
        self.probs.iter().copied().sum()
    }
}

/// Probability vector over vertices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexDistribution<F> {
    probs: Vec<F>,
}

impl<F: Scalar> VertexDistribution<F> {
    pub fn point_mass(n: usize, at: usize) -> Self {
        let mut probs = vec![F::zero(); n];
        probs[at] = F::one();
        Self { probs }
    }

    pub fn probs(&self) -> &[F] {
        &self.probs
    }

    pub fn total_mass(&self) -> F {
        self.probs.iter().copied().sum()
    }

    /// Largest pointwise deviation from the uniform distribution.
    pub fn max_deviation_from_uniform(&self) -> F {
        let unif = F::from_count(self.probs.len()).recip();
        self.probs
            .iter()
            .map(|&p| (p - unif).abs())
            .fold(F::zero(), F::max)
    }
}

/// Exact law of the NBRW endpoint after k steps from `start`.
///
/// k = 0 is the point mass at the start; k = 1 is uniform over the d
/// neighbors; later steps exclude the predecessor.
pub fn nbrw_k_step_vertex_distribution<F: Scalar>(
    g: &RegularGraph,
    start: u32,
    k: usize,
) -> Result<VertexDistribution<F>, SpectralError> {
    if !g.contains_vertex(start) {
        return Err(SpectralError::BadStart { start, n: g.vertex_count() });
    }
    if k > DEFAULT_HORIZON {
        return Err(SpectralError::HorizonExceeded { k, horizon: DEFAULT_HORIZON });
    }
    if k >= 2 && g.degree() < 3 {
        return Err(SpectralError::DegreeTooSmall { d: g.degree(), need: 3 });
    }
    if k == 0 {
        return Ok(VertexDistribution::point_mass(g.vertex_count(), start as usize));
    }
    let mut edges = EdgeDistribution::first_step(g, start)?;
    for _ in 1..k {
        edges.step();
    }
    Ok(edges.vertex_marginal())
}

/// Mixing diagnostics: ρ from the measured λ, the fine mixing time τ, and
/// the per-k worst-case deviation sequence dev(k) = max_{u,v} |P(k)_{uv} − 1/n|
/// for k = 1..=cap (`dev[i]` is step i+1).
///
/// τ, when present, is the least t with dev(k) ≤ 1/n² for every t ≤ k ≤ cap;
/// `None` means the condition still fails at the cap. The verification
/// window is necessarily finite, so "for all k ≥ t" is certified only up to
/// the horizon the report was built with.
#[derive(Debug, Clone, Serialize)]
pub struct MixingReport<F> {
    pub rho: F,
    pub tau: Option<usize>,
    pub dev: Vec<F>,
    #[serde(skip)]
    n: usize,
}

impl<F: Scalar> MixingReport<F> {
    /// The short-return window L = ⌊(ln n)²⌋ associated with this graph size.
    pub fn l_window(&self) -> usize {
        let ln = (self.n as f64).ln();
        (ln * ln).floor() as usize
    }

    /// Deviation series as two-column CSV, `k,dev`.
    pub fn dev_csv(&self) -> String {
        let mut out = String::from("k,dev\n");
        for (i, dev) in self.dev.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 1, dev));
        }
        out
    }
}

/// Exact fine mixing time by sweeping every start vertex.
///
/// Refuses on bipartite or disconnected graphs (checked exactly by BFS,
/// equivalent to λ = d) and when the measured spectral gap is below the
/// eigensolver tolerance.
pub fn fine_mixing_time_tau<F: Scalar>(
    g: &RegularGraph,
    cap: usize,
) -> Result<MixingReport<F>, SpectralError> {
    let n = g.vertex_count();
    let d = g.degree();
    if d < 3 {
        return Err(SpectralError::DegreeTooSmall { d, need: 3 });
    }
    if !g.is_connected() || g.is_bipartite() {
        return Err(SpectralError::BipartiteOrDisconnected);
    }
    assert!(cap >= 1, "cap must be positive");
    let summary = second_eigenvalue::<F>(g, default_tolerance())?;
    if !summary.has_gap() {
        return Err(SpectralError::BipartiteOrDisconnected);
    }
    let rho = mixing_rate_rho(d, summary.lambda)?;

    let dev = (0..n as u32)
        .into_par_iter()
        .map(|start| {
            let mut local = vec![F::zero(); cap];
            let mut edges =
                EdgeDistribution::<F>::first_step(g, start).expect("start in range");
            for (k, slot) in local.iter_mut().enumerate() {
                if k > 0 {
                    edges.step();
                }
                *slot = edges.vertex_marginal().max_deviation_from_uniform();
            }
            local
        })
        .reduce(
            || vec![F::zero(); cap],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x = x.max(y);
                }
                a
            },
        );

    let threshold = F::from_count(n * n).recip();
    let tau = match dev.iter().rposition(|&x| x > threshold) {
        None => Some(1),
        Some(i) if i + 1 == cap => None, // still failing at the horizon
        Some(i) => Some(i + 2),          // dev[i] is step i+1; first good step after it
    };
    Ok(MixingReport { rho, tau, dev, n })
}

/// Short-return mass M = max over ordered target pairs (i,j), including
/// i = j, of Σ_{1 ≤ k < l} P(k)_{v_i v_j}. Zero whenever l − 1 is below
/// both the girth and every pairwise target distance.
#[allow(non_snake_case)]
pub fn short_return_mass_M<F: Scalar>(
    g: &RegularGraph,
    targets: &[u32],
    l: usize,
) -> Result<F, SpectralError> {
    if targets.is_empty() {
        return Err(SpectralError::EmptyTargets);
    }
    if g.degree() < 3 {
        return Err(SpectralError::DegreeTooSmall { d: g.degree(), need: 3 });
    }
    for &t in targets {
        if !g.contains_vertex(t) {
            return Err(SpectralError::BadStart { start: t, n: g.vertex_count() });
        }
    }
    assert!(l >= 1, "window must be positive");
    let mut best = F::zero();
    for &vi in targets {
        let mut sums = vec![F::zero(); targets.len()];
        let mut edges = EdgeDistribution::<F>::first_step(g, vi)?;
        for k in 1..l {
            if k > 1 {
                edges.step();
            }
            let marginal = edges.vertex_marginal();
            for (sum, &vj) in sums.iter_mut().zip(targets) {
                *sum = *sum + marginal.probs()[vj as usize];
            }
        }
        best = sums.iter().copied().fold(best, F::max);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named_graph;

    fn dist(name: &str, start: u32, k: usize) -> Vec<f64> {
        let g = named_graph(name).unwrap();
        nbrw_k_step_vertex_distribution::<f64>(&g, start, k)
            .unwrap()
            .probs()
            .to_vec()
    }

    #[test]
    fn k4_small_k_laws() {
        assert_eq!(dist("k4", 0, 0), vec![1.0, 0.0, 0.0, 0.0]);
        let third = 1.0 / 3.0;
        for (i, p) in dist("k4", 0, 1).iter().enumerate() {
            let want = if i == 0 { 0.0 } else { third };
            assert!((p - want).abs() < 1e-15, "k=1");
        }
        // k=2: cannot be back at the start, uniform on the rest
        for (i, p) in dist("k4", 0, 2).iter().enumerate() {
            let want = if i == 0 { 0.0 } else { third };
            assert!((p - want).abs() < 1e-15, "k=2");
        }
        // k=3: 12 non-backtracking paths, 6 return to the start
        let k3 = dist("k4", 0, 3);
        assert!((k3[0] - 0.5).abs() < 1e-15);
        for p in &k3[1..] {
            assert!((p - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn petersen_no_return_below_girth() {
        for k in 1..5 {
            let p = dist("petersen", 3, k);
            assert_eq!(p[3], 0.0, "k={k} return mass should be exactly zero");
        }
        assert!(dist("petersen", 3, 5)[3] > 0.0);
    }

    #[test]
    fn mass_is_conserved_over_many_steps() {
        let g = named_graph("petersen").unwrap();
        let mut e = EdgeDistribution::<f64>::first_step(&g, 0).unwrap();
        for _ in 0..500 {
            e.step();
        }
        assert!((e.total_mass() - 1.0).abs() < 1e-12);
        assert!((e.vertex_marginal().total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn horizon_and_start_are_checked() {
        let g = named_graph("k4").unwrap();
        assert!(matches!(
            nbrw_k_step_vertex_distribution::<f64>(&g, 9, 1),
            Err(SpectralError::BadStart { start: 9, n: 4 })
        ));
        assert!(matches!(
            nbrw_k_step_vertex_distribution::<f64>(&g, 0, DEFAULT_HORIZON + 1),
            Err(SpectralError::HorizonExceeded { .. })
        ));
    }

    #[test]
    fn tau_on_k4() {
        let report = fine_mixing_time_tau::<f64>(&named_graph("k4").unwrap(), 200).unwrap();
        let tau = report.tau.expect("K4 mixes");
        assert!(report.dev[tau - 1] <= 1.0 / 16.0);
        assert!((report.rho - 1.0 / 2f64.sqrt()).abs() < 1e-9);
        // every deviation from tau onward is under 1/n^2
        for &d in &report.dev[tau - 1..] {
            assert!(d <= 1.0 / 16.0 + 1e-15);
        }
        assert!(report.dev.iter().all(|&d| d >= 0.0));
    }

    #[test]
    fn tau_refuses_bipartite() {
        let err = fine_mixing_time_tau::<f64>(&named_graph("k33").unwrap(), 100).unwrap_err();
        assert!(matches!(err, SpectralError::BipartiteOrDisconnected));
    }

    #[test]
    fn tau_none_when_cap_too_tight() {
        let report = fine_mixing_time_tau::<f64>(&named_graph("petersen").unwrap(), 1).unwrap();
        assert_eq!(report.tau, None);
    }

    #[test]
    fn short_return_examples() {
        let pet = named_graph("petersen").unwrap();
        assert_eq!(short_return_mass_M::<f64>(&pet, &[4], 5).unwrap(), 0.0);
        let k4 = named_graph("k4").unwrap();
        let m = short_return_mass_M::<f64>(&k4, &[1], 4).unwrap();
        assert!((m - 0.5).abs() < 1e-15);
        assert_eq!(short_return_mass_M::<f64>(&k4, &[0, 2], 1).unwrap(), 0.0);
        assert!(matches!(
            short_return_mass_M::<f64>(&k4, &[], 3),
            Err(SpectralError::EmptyTargets)
        ));
    }

    #[test]
    fn report_serializes_to_pinned_schema() {
        let report = fine_mixing_time_tau::<f64>(&named_graph("k4").unwrap(), 3).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.starts_with("{\"rho\":"), "{json}");
        assert!(json.contains("\"tau\":"));
        assert!(json.contains("\"dev\":["));
        assert!(!json.contains("\"n\":"));
        let csv = report.dev_csv();
        assert!(csv.starts_with("k,dev\n1,"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn l_window_matches_log_squared() {
        let report = fine_mixing_time_tau::<f64>(&named_graph("petersen").unwrap(), 60).unwrap();
        // ln(10)^2 = 5.301...
        assert_eq!(report.l_window(), 5);
    }
}
