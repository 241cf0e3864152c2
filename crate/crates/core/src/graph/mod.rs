//! Simple `d`-regular graphs: construction, named fixtures, random
//! generation, and the distance/girth queries the walk analysis needs.

mod generate;
mod io;

pub use generate::{random_regular, GraphGenSpec};
pub use io::{read_edge_list, write_edge_list};

use crate::VertexId;
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph is not regular: vertex {vertex} has degree {found}, expected {expected}")]
    NotRegular { vertex: VertexId, found: usize, expected: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(VertexId, VertexId),
    #[error("vertex id {id} out of range for n={n}")]
    BadVertexId { id: VertexId, n: usize },
    #[error("unknown named graph `{0}`")]
    UnknownName(String),
    #[error("n*d = {0} is odd; no d-regular graph exists")]
    OddDegreeSum(usize),
    #[error("gave up after {0} generation attempts")]
    AttemptsExhausted(usize),
    #[error("degree {d} out of range for n={n}")]
    DegreeOutOfRange { d: usize, n: usize },
    #[error("fewer than {requested} vertices satisfy the distance constraint (found {found})")]
    Infeasible { requested: usize, found: usize },
    #[error("edge list format: {0}")]
    Format(String),
    #[error("io: {0}")]
    Io(String),
}

/// A simple undirected `d`-regular graph on `n` vertices.
///
/// Adjacency is stored as a flat row-major `n × d` table of sorted neighbor
/// ids, which makes walks and serialization deterministic. The structure is
/// immutable after construction and safe to share across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularGraph {
    n: usize,
    d: usize,
    /// Flat adjacency: `nbrs[v*d .. (v+1)*d]` is the sorted neighbor list of `v`.
    nbrs: Vec<VertexId>,
    /// For the directed edge with id `e = v*d + slot` pointing at `w`,
    /// `reciprocal[e]` is the slot of `v` inside `w`'s neighbor list. This is
    /// what lets the non-backtracking edge step skip the reverse edge in O(1).
    reciprocal: Vec<u32>,
}

impl RegularGraph {
    /// Validates an edge list and builds the graph. Every vertex must end up
    /// with the same degree `d ≥ 2`.
    pub fn from_edge_list(n: usize, edges: &[(VertexId, VertexId)]) -> Result<Self, GraphError> {
        let mut adj: Vec<Vec<VertexId>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u as usize >= n {
                return Err(GraphError::BadVertexId { id: u, n });
            }
            if v as usize >= n {
                return Err(GraphError::BadVertexId { id: v, n });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if adj[u as usize].contains(&v) {
                return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
            }
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        let d = adj.first().map_or(0, Vec::len);
        if d < 2 {
            return Err(GraphError::NotRegular { vertex: 0, found: d, expected: 2 });
        }
        for (v, list) in adj.iter().enumerate() {
            if list.len() != d {
                return Err(GraphError::NotRegular {
                    vertex: v as VertexId,
                    found: list.len(),
                    expected: d,
                });
            }
        }
        let mut nbrs = Vec::with_capacity(n * d);
        for list in &mut adj {
            list.sort_unstable();
            nbrs.extend_from_slice(list);
        }
        Ok(Self::from_sorted_table(n, d, nbrs))
    }

    /// `nbrs` must already be a valid sorted n×d adjacency table.
    fn from_sorted_table(n: usize, d: usize, nbrs: Vec<VertexId>) -> Self {
        debug_assert_eq!(nbrs.len(), n * d);
        let mut reciprocal = vec![0u32; n * d];
        for v in 0..n {
            for slot in 0..d {
                let w = nbrs[v * d + slot] as usize;
                let back = nbrs[w * d..(w + 1) * d]
                    .binary_search(&(v as VertexId))
                    .expect("adjacency must be symmetric");
                reciprocal[v * d + slot] = back as u32;
            }
        }
        Self { n, d, nbrs, reciprocal }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn edge_count(&self) -> usize {
        self.n * self.d / 2
    }

    /// Number of directed edges, `n·d`.
    pub fn directed_edge_count(&self) -> usize {
        self.n * self.d
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        let v = v as usize;
        &self.nbrs[v * self.d..(v + 1) * self.d]
    }

    /// Head vertex of directed edge `e = v*d + slot`.
    #[inline]
    pub fn edge_head(&self, e: usize) -> VertexId {
        self.nbrs[e]
    }

    /// Slot of the reverse edge's origin inside the head's neighbor list.
    #[inline]
    pub fn reciprocal_slot(&self, e: usize) -> usize {
        self.reciprocal[e] as usize
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        (v as usize) < self.n
    }

    /// All undirected edges as `(u, v)` with `u < v`, lexicographically sorted.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for v in 0..self.n as VertexId {
            for &w in self.neighbors(v) {
                if v < w {
                    out.push((v, w));
                }
            }
        }
        out
    }

    /// BFS distances from `start`; `u32::MAX` marks unreachable vertices.
    pub fn bfs_distances(&self, start: VertexId) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.n];
        dist[start as usize] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let dv = dist[v as usize];
            for &w in self.neighbors(v) {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dv + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Shortest-path distance between `u` and `v`; `None` when disconnected.
    pub fn pairwise_distance(&self, u: VertexId, v: VertexId) -> Result<Option<u32>, GraphError> {
        for id in [u, v] {
            if !self.contains_vertex(id) {
                return Err(GraphError::BadVertexId { id, n: self.n });
            }
        }
        if u == v {
            return Ok(Some(0));
        }
        let d = self.bfs_distances(u)[v as usize];
        Ok(if d == u32::MAX { None } else { Some(d) })
    }

    /// Length of the shortest cycle; `None` for forests.
    ///
    /// One BFS per root: the first non-tree edge (x, y) seen closes a walk of
    /// length dist(x)+dist(y)+1 through the root, and the minimum of that
    /// quantity over all roots and non-tree edges is exactly the girth.
    pub fn girth(&self) -> Option<usize> {
        let mut best = u32::MAX;
        let mut dist = vec![u32::MAX; self.n];
        let mut parent = vec![u32::MAX; self.n];
        let mut queue = VecDeque::new();
        for root in 0..self.n as VertexId {
            dist.fill(u32::MAX);
            queue.clear();
            dist[root as usize] = 0;
            parent[root as usize] = u32::MAX;
            queue.push_back(root);
            while let Some(x) = queue.pop_front() {
                let dx = dist[x as usize];
                // Deeper vertices cannot improve on the best cycle seen so far.
                if 2 * dx + 1 >= best {
                    break;
                }
                for &y in self.neighbors(x) {
                    if dist[y as usize] == u32::MAX {
                        dist[y as usize] = dx + 1;
                        parent[y as usize] = x;
                        queue.push_back(y);
                    } else if y != parent[x as usize] && dist[y as usize] >= dx {
                        // Non-tree edge; counts each cycle once per root side.
                        best = best.min(dx + dist[y as usize] + 1);
                    }
                }
            }
        }
        (best != u32::MAX).then_some(best as usize)
    }

    /// Greedily selects `r` vertices with pairwise distance at least `g`,
    /// starting from `anchor` and scanning candidates lowest-id-first.
    pub fn far_vertex_set(
        &self,
        r: usize,
        g: u32,
        anchor: VertexId,
    ) -> Result<Vec<VertexId>, GraphError> {
        if !self.contains_vertex(anchor) {
            return Err(GraphError::BadVertexId { id: anchor, n: self.n });
        }
        assert!(r >= 1, "far_vertex_set needs r >= 1");
        assert!(g >= 1, "far_vertex_set needs g >= 1");
        let mut chosen = vec![anchor];
        // min distance from each vertex to the chosen set
        let mut min_dist = self.bfs_distances(anchor);
        while chosen.len() < r {
            let next = (0..self.n as VertexId).find(|&v| min_dist[v as usize] >= g);
            match next {
                Some(v) => {
                    chosen.push(v);
                    for (slot, dv) in self.bfs_distances(v).into_iter().enumerate() {
                        if dv < min_dist[slot] {
                            min_dist[slot] = dv;
                        }
                    }
                }
                None => {
                    return Err(GraphError::Infeasible { requested: r, found: chosen.len() })
                }
            }
        }
        Ok(chosen)
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.bfs_distances(0).iter().all(|&d| d != u32::MAX)
    }

    /// BFS 2-coloring test. For a connected d-regular graph this is
    /// equivalent to the adjacency spectrum containing −d.
    pub fn is_bipartite(&self) -> bool {
        let mut color = vec![u8::MAX; self.n];
        let mut queue = VecDeque::new();
        for root in 0..self.n as VertexId {
            if color[root as usize] != u8::MAX {
                continue;
            }
            color[root as usize] = 0;
            queue.push_back(root);
            while let Some(v) = queue.pop_front() {
                let cv = color[v as usize];
                for &w in self.neighbors(v) {
                    if color[w as usize] == u8::MAX {
                        color[w as usize] = 1 - cv;
                        queue.push_back(w);
                    } else if color[w as usize] == cv {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Canonical small fixtures used by the enumeration oracles.
pub fn named_graph(name: &str) -> Result<RegularGraph, GraphError> {
    let edges: Vec<(VertexId, VertexId)> = match name {
        "k4" => (0..4).flat_map(|u| (u + 1..4).map(move |v| (u, v))).collect(),
        "k33" => (0..3).flat_map(|u| (3..6).map(move |v| (u, v))).collect(),
        "petersen" => {
            let mut e = Vec::with_capacity(15);
            for i in 0..5u32 {
                e.push((i, (i + 1) % 5)); // outer pentagon
                e.push((5 + i, 5 + (i + 2) % 5)); // inner pentagram
                e.push((i, i + 5)); // spokes
            }
            e
        }
        "q3" => {
            let mut e = Vec::with_capacity(12);
            for u in 0..8u32 {
                for bit in 0..3 {
                    let v = u ^ (1 << bit);
                    if u < v {
                        e.push((u, v));
                    }
                }
            }
            e
        }
        other => return Err(GraphError::UnknownName(other.to_string())),
    };
    let n = match name {
        "k4" => 4,
        "k33" => 6,
        "petersen" => 10,
        "q3" => 8,
        _ => unreachable!(),
    };
    RegularGraph::from_edge_list(n, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k4_from_all_pairs() {
        let edges: Vec<_> = (0..4).flat_map(|u| (u + 1..4).map(move |v| (u, v))).collect();
        let g = RegularGraph::from_edge_list(4, &edges).unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.degree(), 3);
    }

    #[test]
    fn path_is_not_regular() {
        let err = RegularGraph::from_edge_list(3, &[(0, 1), (1, 2)]).unwrap_err();
        assert!(matches!(err, GraphError::NotRegular { .. }));
    }

    #[test]
    fn rejects_self_loop_duplicate_and_bad_id() {
        assert_eq!(
            RegularGraph::from_edge_list(3, &[(0, 0)]).unwrap_err(),
            GraphError::SelfLoop(0)
        );
        assert_eq!(
            RegularGraph::from_edge_list(3, &[(0, 1), (1, 0)]).unwrap_err(),
            GraphError::DuplicateEdge(0, 1)
        );
        assert_eq!(
            RegularGraph::from_edge_list(3, &[(0, 7)]).unwrap_err(),
            GraphError::BadVertexId { id: 7, n: 3 }
        );
    }

    #[test]
    fn petersen_is_three_regular_with_15_edges() {
        let g = named_graph("petersen").unwrap();
        assert_eq!(g.vertex_count(), 10);
        assert_eq!(g.degree(), 3);
        assert_eq!(g.edges().len(), 15);
        // adjacency symmetric by construction; spot-check sortedness
        for v in 0..10 {
            let nb = g.neighbors(v);
            assert!(nb.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn named_graphs_have_expected_shape() {
        for (name, n, d) in [("k4", 4, 3), ("petersen", 10, 3), ("k33", 6, 3), ("q3", 8, 3)] {
            let g = named_graph(name).unwrap();
            assert_eq!((g.vertex_count(), g.degree()), (n, d), "{name}");
        }
        assert!(matches!(named_graph("c5"), Err(GraphError::UnknownName(_))));
    }

    #[test]
    fn girth_of_named_graphs() {
        assert_eq!(named_graph("k4").unwrap().girth(), Some(3));
        assert_eq!(named_graph("petersen").unwrap().girth(), Some(5));
        assert_eq!(named_graph("k33").unwrap().girth(), Some(4));
        assert_eq!(named_graph("q3").unwrap().girth(), Some(4));
    }

    #[test]
    fn distances_on_named_graphs() {
        let k4 = named_graph("k4").unwrap();
        assert_eq!(k4.pairwise_distance(2, 2).unwrap(), Some(0));
        assert_eq!(k4.pairwise_distance(0, 3).unwrap(), Some(1));
        let p = named_graph("petersen").unwrap();
        // two non-adjacent outer vertices
        assert_eq!(p.pairwise_distance(0, 2).unwrap(), Some(2));
        assert!(p.pairwise_distance(0, 11).is_err());
    }

    #[test]
    fn far_vertex_set_examples() {
        let p = named_graph("petersen").unwrap();
        assert_eq!(p.far_vertex_set(1, 3, 4).unwrap(), vec![4]);
        let k4 = named_graph("k4").unwrap();
        assert!(matches!(
            k4.far_vertex_set(2, 2, 0),
            Err(GraphError::Infeasible { requested: 2, found: 1 })
        ));
        let pair = p.far_vertex_set(2, 2, 0).unwrap();
        assert_eq!(pair[0], 0);
        let d = p.pairwise_distance(pair[0], pair[1]).unwrap().unwrap();
        assert!(d >= 2);
    }

    #[test]
    fn bipartite_detection() {
        assert!(named_graph("k33").unwrap().is_bipartite());
        assert!(named_graph("q3").unwrap().is_bipartite());
        assert!(!named_graph("k4").unwrap().is_bipartite());
        assert!(!named_graph("petersen").unwrap().is_bipartite());
    }

    #[test]
    fn reciprocal_slots_point_back() {
        let g = named_graph("petersen").unwrap();
        for v in 0..10u32 {
            for slot in 0..3 {
                let e = v as usize * 3 + slot;
                let w = g.edge_head(e);
                let back = g.reciprocal_slot(e);
                assert_eq!(g.neighbors(w)[back], v);
            }
        }
    }
}
