//! Seeded Monte Carlo sampling of non-backtracking and simple random walks.
//!
//! Samplers are deterministic functions of (graph, config, trial index):
//! trial i draws from stream i of a ChaCha8 generator keyed by the config
//! seed, so ensembles reproduce bit-for-bit at any degree of parallelism.

use crate::graph::RegularGraph;
use crate::VertexId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, thiserror::Error)]
pub enum WalkError {
    #[error("degree {d} too small for a non-backtracking walk, need at least {need}")]
    DegreeTooSmall { d: usize, need: usize },
    #[error("start vertex {start} out of range for n = {n}")]
    BadStart { start: VertexId, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkKind {
    Nbrw,
    Srw,
}

/// A walk experiment: length m (so the mean visit count is μ = m/n), start
/// vertex, walk kind, master seed, and whether to keep the full trace
/// w_0..w_m.
#[derive(Debug, Clone, Copy)]
pub struct WalkConfig {
    pub kind: WalkKind,
    pub m: usize,
    pub start: VertexId,
    pub seed: u64,
    pub record_trace: bool,
}

impl WalkConfig {
    pub fn new(kind: WalkKind, m: usize, start: VertexId, seed: u64) -> Self {
        assert!(m >= 1, "walk length must be positive");
        Self { kind, m, start, seed, record_trace: false }
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }
}

/// Per-vertex visit tallies of one walk. Positions 1..=m are counted and
/// position 0 (the start) is not, so Σ_v counts(v) = m always.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisitCounts {
    pub counts: Vec<u64>,
    pub m: usize,
    pub start: VertexId,
    pub end: VertexId,
    pub trace: Option<Vec<VertexId>>,
}

impl VisitCounts {
    /// CSV dump, `vertex,count`, one row per vertex.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("vertex,count\n");
        for (v, c) in self.counts.iter().enumerate() {
            out.push_str(&format!("{v},{c}\n"));
        }
        out
    }
}

fn validate(g: &RegularGraph, cfg: &WalkConfig) -> Result<(), WalkError> {
    assert!(cfg.m >= 1, "walk length must be positive");
    if !g.contains_vertex(cfg.start) {
        return Err(WalkError::BadStart { start: cfg.start, n: g.vertex_count() });
    }
    if cfg.kind == WalkKind::Nbrw && cfg.m >= 2 && g.degree() < 3 {
        return Err(WalkError::DegreeTooSmall { d: g.degree(), need: 3 });
    }
    Ok(())
}

/// Walk loop shared by both kinds. The state is the directed edge just
/// traversed; the predecessor's slot in the new vertex's neighbor list is
/// its reciprocal slot, so "uniform excluding the predecessor" is one draw
/// in [0, d−1) plus an index skip — no rejection, one RNG call per step.
fn sample_with_rng(g: &RegularGraph, cfg: &WalkConfig, rng: &mut ChaCha8Rng) -> VisitCounts {
    let d = g.degree();
    let mut counts = vec![0u64; g.vertex_count()];
    let mut trace = cfg.record_trace.then(|| {
        let mut t = Vec::with_capacity(cfg.m + 1);
        t.push(cfg.start);
        t
    });

    let mut edge = cfg.start as usize * d + rng.gen_range(0..d);
    let mut here = g.edge_head(edge);
    counts[here as usize] += 1;
    if let Some(t) = trace.as_mut() {
        t.push(here);
    }
    for _ in 1..cfg.m {
        let slot = match cfg.kind {
            WalkKind::Srw => rng.gen_range(0..d),
            WalkKind::Nbrw => {
                let back = g.reciprocal_slot(edge);
                let raw = rng.gen_range(0..d - 1);
                raw + usize::from(raw >= back)
            }
        };
        edge = here as usize * d + slot;
        here = g.edge_head(edge);
        counts[here as usize] += 1;
        if let Some(t) = trace.as_mut() {
            t.push(here);
        }
    }
    VisitCounts { counts, m: cfg.m, start: cfg.start, end: here, trace }
}

fn stream_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// One non-backtracking walk: first step uniform over all d neighbors,
/// every later step uniform over the d−1 neighbors excluding the vertex
/// just left. Uses stream 0 of the seed.
pub fn nbrw_sample(g: &RegularGraph, cfg: &WalkConfig) -> Result<VisitCounts, WalkError> {
    assert_eq!(cfg.kind, WalkKind::Nbrw);
    validate(g, cfg)?;
    Ok(sample_with_rng(g, cfg, &mut stream_rng(cfg.seed, 0)))
}

/// One simple random walk: every step uniform over all d neighbors.
pub fn srw_sample(g: &RegularGraph, cfg: &WalkConfig) -> Result<VisitCounts, WalkError> {
    assert_eq!(cfg.kind, WalkKind::Srw);
    validate(g, cfg)?;
    Ok(sample_with_rng(g, cfg, &mut stream_rng(cfg.seed, 0)))
}

/// An ensemble of independent walks; trial i uses RNG stream i. The output
/// order is by trial index, independent of scheduling.
pub fn run_trials(
    g: &RegularGraph,
    cfg: &WalkConfig,
    trials: usize,
) -> Result<Vec<VisitCounts>, WalkError> {
    assert!(trials >= 1, "need at least one trial");
    validate(g, cfg)?;
    Ok((0..trials as u64)
        .into_par_iter()
        .map(|i| sample_with_rng(g, cfg, &mut stream_rng(cfg.seed, i)))
        .collect())
}

/// Streamed aggregation over an ensemble without materializing it: each
/// sample is folded into an accumulator, partial accumulators are merged.
///
/// `fold` and `merge` must be exactly associative and commutative (integer
/// tallies, maxima, count maps — not bare float sums) or the result will
/// depend on how rayon partitions the range.
pub fn fold_trials<T, I, FF, FM>(
    g: &RegularGraph,
    cfg: &WalkConfig,
    trials: usize,
    init: I,
    fold: FF,
    merge: FM,
) -> Result<T, WalkError>
where
    T: Send,
    I: Fn() -> T + Sync + Send,
    FF: Fn(T, VisitCounts) -> T + Sync + Send,
    FM: Fn(T, T) -> T + Sync + Send,
{
    assert!(trials >= 1, "need at least one trial");
    validate(g, cfg)?;
    Ok((0..trials as u64)
        .into_par_iter()
        .fold(&init, |acc, i| fold(acc, sample_with_rng(g, cfg, &mut stream_rng(cfg.seed, i))))
        .reduce(&init, &merge))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named_graph;

    #[test]
    fn counts_conserve_positions() {
        let g = named_graph("petersen").unwrap();
        for m in [1usize, 2, 7, 100] {
            let cfg = WalkConfig::new(WalkKind::Nbrw, m, 0, 11);
            let s = nbrw_sample(&g, &cfg).unwrap();
            assert_eq!(s.counts.iter().sum::<u64>(), m as u64);
        }
    }

    #[test]
    fn m1_visits_exactly_one_neighbor() {
        let g = named_graph("k4").unwrap();
        let cfg = WalkConfig::new(WalkKind::Nbrw, 1, 2, 5);
        let s = nbrw_sample(&g, &cfg).unwrap();
        assert_eq!(s.counts.iter().sum::<u64>(), 1);
        assert_eq!(s.counts[2], 0, "start cannot be revisited at m=1");
        assert!(g.neighbors(2).contains(&s.end));
        assert_eq!(s.counts[s.end as usize], 1);
    }

    #[test]
    fn same_seed_same_trace() {
        let g = named_graph("petersen").unwrap();
        let cfg = WalkConfig::new(WalkKind::Nbrw, 50, 3, 99).with_trace();
        let a = nbrw_sample(&g, &cfg).unwrap();
        let b = nbrw_sample(&g, &cfg).unwrap();
        assert_eq!(a, b);
        let trace = a.trace.as_ref().unwrap();
        assert_eq!(trace.len(), 51);
        assert_eq!(trace[0], 3);
        assert_eq!(*trace.last().unwrap(), a.end);
    }

    #[test]
    fn trace_never_backtracks_and_recounts() {
        let g = named_graph("petersen").unwrap();
        for seed in 0..20 {
            let cfg = WalkConfig::new(WalkKind::Nbrw, 200, 1, seed).with_trace();
            let s = nbrw_sample(&g, &cfg).unwrap();
            let t = s.trace.as_ref().unwrap();
            let mut recount = vec![0u64; g.vertex_count()];
            for w in t.windows(3) {
                assert_ne!(w[2], w[0], "backtrack at seed {seed}");
            }
            for (i, w) in t.windows(2).enumerate() {
                assert!(g.neighbors(w[0]).contains(&w[1]), "non-edge at step {i}");
                recount[w[1] as usize] += 1;
            }
            assert_eq!(recount, s.counts);
        }
    }

    #[test]
    fn srw_may_backtrack_but_follows_edges() {
        let g = named_graph("k4").unwrap();
        let cfg = WalkConfig::new(WalkKind::Srw, 500, 0, 3).with_trace();
        let s = srw_sample(&g, &cfg).unwrap();
        let t = s.trace.as_ref().unwrap();
        for w in t.windows(2) {
            assert!(g.neighbors(w[0]).contains(&w[1]));
        }
        // with 500 steps on K4 an immediate backtrack is essentially certain
        assert!(t.windows(3).any(|w| w[2] == w[0]));
    }

    #[test]
    fn validation_errors() {
        let g = named_graph("k4").unwrap();
        assert!(matches!(
            nbrw_sample(&g, &WalkConfig::new(WalkKind::Nbrw, 3, 7, 0)),
            Err(WalkError::BadStart { start: 7, n: 4 })
        ));
        // a 2-regular graph (the 4-cycle) cannot host an NBRW of length >= 2
        let cycle = crate::graph::RegularGraph::from_edge_list(
            4,
            &[(0, 1), (1, 2), (2, 3), (0, 3)],
        )
        .unwrap();
        assert!(matches!(
            nbrw_sample(&cycle, &WalkConfig::new(WalkKind::Nbrw, 2, 0, 0)),
            Err(WalkError::DegreeTooSmall { d: 2, need: 3 })
        ));
        // ...but a single step is fine
        assert!(nbrw_sample(&cycle, &WalkConfig::new(WalkKind::Nbrw, 1, 0, 0)).is_ok());
    }

    #[test]
    fn trials_are_ordered_and_stream_indexed() {
        let g = named_graph("petersen").unwrap();
        let cfg = WalkConfig::new(WalkKind::Nbrw, 30, 0, 42);
        let ensemble = run_trials(&g, &cfg, 16).unwrap();
        assert_eq!(ensemble.len(), 16);
        let again = run_trials(&g, &cfg, 16).unwrap();
        assert_eq!(ensemble, again);
        // trial 0 of the ensemble is the plain single sample
        assert_eq!(ensemble[0], nbrw_sample(&g, &cfg).unwrap());
        // trials differ from one another (streams are independent)
        assert_ne!(ensemble[0], ensemble[1]);
    }

    #[test]
    fn fold_matches_materialized_trials() {
        let g = named_graph("petersen").unwrap();
        let cfg = WalkConfig::new(WalkKind::Srw, 25, 4, 7);
        let total: u64 = run_trials(&g, &cfg, 64)
            .unwrap()
            .iter()
            .map(|s| s.counts[4])
            .sum();
        let folded = fold_trials(
            &g,
            &cfg,
            64,
            || 0u64,
            |acc, s| acc + s.counts[4],
            |a, b| a + b,
        )
        .unwrap();
        assert_eq!(total, folded);
    }

    #[test]
    fn csv_shape() {
        let g = named_graph("k4").unwrap();
        let s = nbrw_sample(&g, &WalkConfig::new(WalkKind::Nbrw, 5, 0, 1)).unwrap();
        let csv = s.to_csv();
        assert!(csv.starts_with("vertex,count\n0,"));
        assert_eq!(csv.lines().count(), 5);
    }
}
