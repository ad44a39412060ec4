//! Weighted undirected simple graphs.
//!
//! A [`Graph`] keeps both a dense symmetric weight matrix and per-node
//! adjacency lists. The matrix backs linearization and spectral work, the
//! lists back O(deg) field evaluation. Graphs are immutable once built.
//!
//! Random graphs are drawn with `ChaCha8Rng::seed_from_u64(seed)` from
//! `rand_chacha`. Unordered pairs `(i, j)` with `i < j` are visited in
//! lexicographic order; each pair consumes one `f64` draw for inclusion
//! (`u < p`), followed by one `f64` draw for its weight when the weight mode
//! is uniform.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("edge ({i}, {j}) has non-positive weight {w}")]
    NonpositiveWeight { i: usize, j: usize, w: f64 },
    #[error("edge ({i}, {j}) has non-finite weight")]
    NonFiniteWeight { i: usize, j: usize },
    #[error("edge ({i}, {j}) specified twice with conflicting weights")]
    DuplicateEdge { i: usize, j: usize },
    #[error("node index {index} out of range for graph with {n} nodes")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("edge entries must satisfy i < j, got ({i}, {j})")]
    UnorderedEdge { i: usize, j: usize },
    #[error("edge probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("uniform weight range requires 0 < lo <= hi, got [{lo}, {hi}]")]
    InvalidWeightRange { lo: f64, hi: f64 },
    #[error("no connected graph found after {attempts} draws")]
    NotConnected { attempts: usize },
    #[error("malformed graph JSON: {0}")]
    Json(String),
}

/// Sorted, duplicate-free set of node ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeSet(Vec<usize>);

impl NodeSet {
    pub fn new(ids: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = ids.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        NodeSet(v)
    }

    pub fn empty() -> Self {
        NodeSet(Vec::new())
    }

    /// All nodes `0..n`.
    pub fn full(n: usize) -> Self {
        NodeSet((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.0.binary_search(&id).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        NodeSet(
            self.0
                .iter()
                .copied()
                .filter(|&i| other.contains(i))
                .collect(),
        )
    }

    fn check_within(&self, n: usize) -> Result<(), GraphError> {
        match self.0.last() {
            Some(&index) if index >= n => Err(GraphError::IndexOutOfRange { index, n }),
            _ => Ok(()),
        }
    }
}

impl FromIterator<usize> for NodeSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        NodeSet::new(iter)
    }
}

/// How edge weights are drawn by [`random_graph`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum WeightMode {
    Unit,
    Uniform { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    weights: Vec<f64>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

/// Wire form of a graph: `{"n": int, "edges": [[i, j, w], ...]}` with `i < j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl Graph {
    /// Builds a graph on `n` nodes from an undirected edge list.
    ///
    /// Repeating a pair with an identical weight is accepted; a repeat with
    /// a different weight is a [`GraphError::DuplicateEdge`].
    pub fn new(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut weights = vec![0.0; n * n];
        for &(i, j, w) in edges {
            for index in [i, j] {
                if index >= n {
                    return Err(GraphError::IndexOutOfRange { index, n });
                }
            }
            if i == j {
                return Err(GraphError::SelfLoop(i));
            }
            if !w.is_finite() {
                return Err(GraphError::NonFiniteWeight { i, j });
            }
            if w <= 0.0 {
                return Err(GraphError::NonpositiveWeight { i, j, w });
            }
            let existing = weights[i * n + j];
            if existing != 0.0 && existing != w {
                return Err(GraphError::DuplicateEdge { i, j });
            }
            weights[i * n + j] = w;
            weights[j * n + i] = w;
        }
        Ok(Self::from_weights(n, weights))
    }

    fn from_weights(n: usize, weights: Vec<f64>) -> Self {
        let adjacency = (0..n)
            .map(|i| {
                (0..n)
                    .filter_map(|j| {
                        let w = weights[i * n + j];
                        (w > 0.0).then_some((j, w))
                    })
                    .collect()
            })
            .collect();
        Graph {
            n,
            weights,
            adjacency,
        }
    }

    /// Complete graph with unit weights.
    pub fn complete(n: usize) -> Result<Self, GraphError> {
        let edges: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j, 1.0)))
            .collect();
        Self::new(n, &edges)
    }

    /// Path `0 - 1 - ... - (n-1)` with unit weights.
    pub fn path(n: usize) -> Result<Self, GraphError> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i, 1.0)).collect();
        Self::new(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    /// Row-major `n x n` weight matrix.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    /// Undirected edges `(i, j, w)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for &(j, w) in &self.adjacency[i] {
                if i < j {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Restriction to `s`, keeping only edges with both endpoints in `s`.
    ///
    /// Node `k` of the returned graph is node `map[k]` of `self`.
    pub fn induced_subgraph(&self, s: &NodeSet) -> Result<(Graph, Vec<usize>), GraphError> {
        s.check_within(self.n)?;
        let map: Vec<usize> = s.iter().collect();
        let m = map.len();
        let mut weights = vec![0.0; m * m];
        for (a, &i) in map.iter().enumerate() {
            for (b, &j) in map.iter().enumerate() {
                weights[a * m + b] = self.weight(i, j);
            }
        }
        Ok((Graph::from_weights(m, weights), map))
    }

    /// Maximal connected sets, ordered by smallest member.
    pub fn connected_components(&self) -> Vec<NodeSet> {
        let mut seen = vec![false; self.n];
        let mut components = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            queue.push_back(start);
            let mut members = Vec::new();
            while let Some(i) = queue.pop_front() {
                members.push(i);
                for &(j, _) in &self.adjacency[i] {
                    if !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
            components.push(NodeSet::new(members));
        }
        components
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().len() == 1
    }

    /// True iff no edge has both endpoints in `s`.
    pub fn is_independent_set(&self, s: &NodeSet) -> Result<bool, GraphError> {
        s.check_within(self.n)?;
        Ok(s.iter()
            .all(|i| self.adjacency[i].iter().all(|&(j, _)| !s.contains(j))))
    }

    /// Standard weighted Laplacian `D - A`, row-major.
    pub fn laplacian_matrix(&self) -> Vec<f64> {
        let n = self.n;
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            let mut degree = 0.0;
            for &(j, w) in &self.adjacency[i] {
                l[i * n + j] = -w;
                degree += w;
            }
            l[i * n + i] = degree;
        }
        l
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            n: self.n,
            edges: self.edges(),
        }
    }

    pub fn from_json(spec: &GraphJson) -> Result<Self, GraphError> {
        for &(i, j, _) in &spec.edges {
            if i > j {
                return Err(GraphError::UnorderedEdge { i, j });
            }
        }
        Graph::new(spec.n, &spec.edges)
    }

    pub fn from_json_str(text: &str) -> Result<Self, GraphError> {
        let spec: GraphJson =
            serde_json::from_str(text).map_err(|e| GraphError::Json(e.to_string()))?;
        Self::from_json(&spec)
    }

    /// Short content hash of the canonical edge list, used to tag outputs.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.n as u64).to_le_bytes());
        for (i, j, w) in self.edges() {
            hasher.update((i as u64).to_le_bytes());
            hasher.update((j as u64).to_le_bytes());
            hasher.update(w.to_bits().to_le_bytes());
        }
        hex::encode(&hasher.finalize()[..8])
    }
}

/// Erdős–Rényi style graph; see the module docs for the exact draw order.
pub fn random_graph(n: usize, p: f64, weights: WeightMode, seed: u64) -> Result<Graph, GraphError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    draw_graph(n, p, weights, &mut rng)
}

/// Draws graphs from one seeded stream until a connected one appears.
pub fn random_connected_graph(
    n: usize,
    p: f64,
    weights: WeightMode,
    seed: u64,
) -> Result<Graph, GraphError> {
    const MAX_ATTEMPTS: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let g = draw_graph(n, p, weights, &mut rng)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(GraphError::NotConnected {
        attempts: MAX_ATTEMPTS,
    })
}

fn draw_graph(
    n: usize,
    p: f64,
    weights: WeightMode,
    rng: &mut ChaCha8Rng,
) -> Result<Graph, GraphError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::InvalidProbability(p));
    }
    if let WeightMode::Uniform { lo, hi } = weights {
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(GraphError::InvalidWeightRange { lo, hi });
        }
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < p {
                let w = match weights {
                    WeightMode::Unit => 1.0,
                    WeightMode::Uniform { lo, hi } => lo + (hi - lo) * rng.gen::<f64>(),
                };
                edges.push((i, j, w));
            }
        }
    }
    Graph::new(n, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::new(3, &[(0, 1, 1.0), (0, 2, 2.0), (1, 2, 3.0)]).unwrap()
    }

    #[test]
    fn single_edge_is_symmetric() {
        let g = Graph::new(2, &[(0, 1, 1.0)]).unwrap();
        assert_eq!(g.weight(0, 1), 1.0);
        assert_eq!(g.weight(1, 0), 1.0);
        assert_eq!(g.weight(0, 0), 0.0);
        assert_eq!(g.weight(1, 1), 0.0);
    }

    #[test]
    fn no_edges_gives_zero_matrix() {
        let g = Graph::new(3, &[]).unwrap();
        assert!(g.weights().iter().all(|&w| w == 0.0));
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(Graph::new(3, &[(0, 0, 1.0)]), Err(GraphError::SelfLoop(0)));
        assert!(matches!(
            Graph::new(3, &[(0, 1, 0.0)]),
            Err(GraphError::NonpositiveWeight { .. })
        ));
        assert!(matches!(
            Graph::new(3, &[(0, 1, -1.0)]),
            Err(GraphError::NonpositiveWeight { .. })
        ));
        assert!(matches!(
            Graph::new(3, &[(0, 1, f64::NAN)]),
            Err(GraphError::NonFiniteWeight { .. })
        ));
        assert_eq!(
            Graph::new(3, &[(0, 1, 1.0), (1, 0, 2.0)]),
            Err(GraphError::DuplicateEdge { i: 1, j: 0 })
        );
        assert!(Graph::new(3, &[(0, 1, 1.0), (1, 0, 1.0)]).is_ok());
        assert_eq!(
            Graph::new(3, &[(0, 3, 1.0)]),
            Err(GraphError::IndexOutOfRange { index: 3, n: 3 })
        );
        assert_eq!(Graph::new(0, &[]), Err(GraphError::Empty));
    }

    #[test]
    fn induced_subgraph_of_path_endpoints_has_no_edges() {
        let g = Graph::path(3).unwrap();
        let (sub, map) = g.induced_subgraph(&NodeSet::new([0, 2])).unwrap();
        assert_eq!(sub.n(), 2);
        assert_eq!(sub.edge_count(), 0);
        assert_eq!(map, vec![0, 2]);
    }

    #[test]
    fn induced_subgraph_keeps_original_weight() {
        let (sub, map) = triangle().induced_subgraph(&NodeSet::new([1, 2])).unwrap();
        assert_eq!(map, vec![1, 2]);
        assert_eq!(sub.edges(), vec![(0, 1, 3.0)]);
    }

    #[test]
    fn induced_subgraph_on_all_nodes_is_identity() {
        let g = triangle();
        let (sub, map) = g.induced_subgraph(&NodeSet::full(3)).unwrap();
        assert_eq!(sub, g);
        assert_eq!(map, vec![0, 1, 2]);
    }

    #[test]
    fn induced_subgraph_rejects_out_of_range() {
        assert_eq!(
            triangle()
                .induced_subgraph(&NodeSet::new([1, 5]))
                .unwrap_err(),
            GraphError::IndexOutOfRange { index: 5, n: 3 }
        );
    }

    #[test]
    fn components() {
        assert_eq!(
            Graph::path(3).unwrap().connected_components(),
            vec![NodeSet::new([0, 1, 2])]
        );
        assert_eq!(
            Graph::new(3, &[]).unwrap().connected_components(),
            vec![NodeSet::new([0]), NodeSet::new([1]), NodeSet::new([2])]
        );
        let g = Graph::new(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(
            g.connected_components(),
            vec![NodeSet::new([0, 1]), NodeSet::new([2, 3])]
        );
    }

    #[test]
    fn independent_sets() {
        let g = Graph::path(3).unwrap();
        assert!(g.is_independent_set(&NodeSet::new([0, 2])).unwrap());
        assert!(!g.is_independent_set(&NodeSet::new([0, 1])).unwrap());
        assert!(g.is_independent_set(&NodeSet::empty()).unwrap());
        assert!(g.is_independent_set(&NodeSet::new([7])).is_err());
    }

    #[test]
    fn random_graph_extremes() {
        let empty = random_graph(6, 0.0, WeightMode::Unit, 3).unwrap();
        assert_eq!(empty.edge_count(), 0);
        let full = random_graph(4, 1.0, WeightMode::Unit, 3).unwrap();
        assert_eq!(full, Graph::complete(4).unwrap());
        assert_eq!(
            random_graph(4, 1.5, WeightMode::Unit, 0),
            Err(GraphError::InvalidProbability(1.5))
        );
        assert!(matches!(
            random_graph(4, 0.5, WeightMode::Uniform { lo: 0.0, hi: 1.0 }, 0),
            Err(GraphError::InvalidWeightRange { .. })
        ));
    }

    #[test]
    fn random_graph_is_deterministic() {
        let a = random_graph(20, 0.5, WeightMode::Uniform { lo: 0.5, hi: 2.0 }, 42).unwrap();
        let b = random_graph(20, 0.5, WeightMode::Uniform { lo: 0.5, hi: 2.0 }, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.content_hash(), b.content_hash());
        let c = random_graph(20, 0.5, WeightMode::Uniform { lo: 0.5, hi: 2.0 }, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_connected_graph_is_connected() {
        for seed in 0..20 {
            let g = random_connected_graph(12, 0.2, WeightMode::Unit, seed).unwrap();
            assert!(g.is_connected());
        }
    }

    #[test]
    fn json_round_trip_and_validation() {
        let g = triangle();
        let text = serde_json::to_string(&g.to_json()).unwrap();
        assert_eq!(Graph::from_json_str(&text).unwrap(), g);
        assert_eq!(
            Graph::from_json_str(r#"{"n": 3, "edges": [[2, 1, 1.0]]}"#),
            Err(GraphError::UnorderedEdge { i: 2, j: 1 })
        );
        assert_eq!(
            Graph::from_json_str(r#"{"n": 3, "edges": [[1, 1, 1.0]]}"#),
            Err(GraphError::SelfLoop(1))
        );
        assert!(matches!(
            Graph::from_json_str(r#"{"n": 3, "edges": [[0, 1, -2]]}"#),
            Err(GraphError::NonpositiveWeight { .. })
        ));
        assert!(matches!(
            Graph::from_json_str(r#"{"n": 3, "edges": [[0, 1]]}"#),
            Err(GraphError::Json(_))
        ));
    }

    #[test]
    fn laplacian_rows_sum_to_zero() {
        let l = triangle().laplacian_matrix();
        for i in 0..3 {
            let s: f64 = l[i * 3..i * 3 + 3].iter().sum();
            assert_eq!(s, 0.0);
        }
        assert_eq!(l[0], 3.0);
    }
}
