//! Random regular graphs via the configuration model with whole-graph
//! rejection of self-loops and multi-edges.

use super::{GraphError, RegularGraph};
use crate::VertexId;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generation request for [`random_regular`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphGenSpec {
    pub n: usize,
    pub d: usize,
    /// When set, regenerate until the girth is at least this (≥ 3).
    pub min_girth: Option<usize>,
    pub seed: u64,
    /// Total pairing attempts allowed, counting both simplicity and girth
    /// rejections. Must be ≥ 1.
    pub max_attempts: usize,
}

impl GraphGenSpec {
    pub fn new(n: usize, d: usize, seed: u64) -> Self {
        Self { n, d, min_girth: None, seed, max_attempts: 10_000 }
    }

    pub fn with_min_girth(mut self, g: usize) -> Self {
        assert!(g >= 3, "min_girth must be at least 3");
        self.min_girth = Some(g);
        self
    }

    pub fn with_max_attempts(mut self, attempts: usize) -> Self {
        assert!(attempts >= 1);
        self.max_attempts = attempts;
        self
    }
}

/// Samples a simple `d`-regular graph on `n` vertices: pair up `n·d`
/// shuffled stubs, reject the whole pairing on any self-loop or duplicate
/// edge, and (when requested) reject whole graphs until the girth bound
/// holds. Deterministic given the seed: one ChaCha8 stream drives every
/// attempt in sequence.
pub fn random_regular(spec: &GraphGenSpec) -> Result<RegularGraph, GraphError> {
    let GraphGenSpec { n, d, min_girth, seed, max_attempts } = *spec;
    if n * d % 2 != 0 {
        return Err(GraphError::OddDegreeSum(n * d));
    }
    if d < 3 || d >= n {
        return Err(GraphError::DegreeOutOfRange { d, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stubs: Vec<VertexId> = Vec::with_capacity(n * d);
    for _ in 0..max_attempts {
        stubs.clear();
        stubs.extend((0..n as VertexId).flat_map(|v| std::iter::repeat(v).take(d)));
        stubs.shuffle(&mut rng);
        let Some(graph) = try_pairing(n, d, &stubs) else {
            continue;
        };
        // girth None means acyclic, i.e. infinite girth: any bound holds
        let girth_ok = match min_girth {
            Some(bound) => graph.girth().map_or(true, |g| g >= bound),
            None => true,
        };
        if girth_ok {
            return Ok(graph);
        }
    }
    Err(GraphError::AttemptsExhausted(max_attempts))
}

/// Pair stub `i` with stub `i + nd/2`; `None` when the pairing is not simple.
fn try_pairing(n: usize, d: usize, stubs: &[VertexId]) -> Option<RegularGraph> {
    let half = stubs.len() / 2;
    let mut adj: Vec<Vec<VertexId>> = vec![Vec::with_capacity(d); n];
    for i in 0..half {
        let (u, v) = (stubs[i], stubs[i + half]);
        if u == v || adj[u as usize].contains(&v) {
            return None;
        }
        adj[u as usize].push(v);
        adj[v as usize].push(u);
    }
    let mut nbrs = Vec::with_capacity(n * d);
    for list in &mut adj {
        list.sort_unstable();
        nbrs.extend_from_slice(list);
    }
    // pairing guarantees simplicity and regularity, so skip re-validation
    Some(RegularGraph::from_sorted_table(n, d, nbrs))
}
