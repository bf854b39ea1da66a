//! Sparse undirected weighted graphs.
//!
//! Edges are stored once, in canonical orientation `i < j`, sorted
//! lexicographically. Everything that iterates over edges (total variation,
//! the inner LP's difference operator) works on this list, so the number of
//! per-edge variables equals `|E|`.

use crate::error::{invalid, Result};

/// Gaussian weights below this are dropped from k-NN graphs.
pub const MIN_KNN_WEIGHT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    degrees: Vec<f64>,
    /// `adjacency[v]` lists `(neighbor, edge index)`.
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl Graph {
    /// Builds a graph from undirected edges given in any orientation.
    ///
    /// Rejects self-loops, non-positive or non-finite weights, out-of-range
    /// endpoints and duplicate edges (`(i, j)` and `(j, i)` count as the same edge).
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut list = Vec::new();
        for (a, b, w) in edges {
            if a >= n || b >= n {
                return invalid(format!("edge ({a}, {b}) out of range for {n} vertices"));
            }
            if a == b {
                return invalid(format!("self-loop at vertex {a}"));
            }
            if !(w.is_finite() && w > 0.0) {
                return invalid(format!("edge ({a}, {b}) has non-positive weight {w}"));
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            list.push(Edge { i, j, w });
        }
        list.sort_by(|x, y| (x.i, x.j).cmp(&(y.i, y.j)));
        if let Some(pair) = list.windows(2).find(|p| p[0].i == p[1].i && p[0].j == p[1].j) {
            return invalid(format!("duplicate edge ({}, {})", pair[0].i, pair[0].j));
        }

        let mut degrees = vec![0.0; n];
        let mut adjacency = vec![Vec::new(); n];
        for (e, edge) in list.iter().enumerate() {
            degrees[edge.i] += edge.w;
            degrees[edge.j] += edge.w;
            adjacency[edge.i].push((edge.j, e));
            adjacency[edge.j].push((edge.i, e));
        }
        Ok(Self { n, edges: list, degrees, adjacency })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Weighted degrees `d_i = sum_j w_ij`.
    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    /// Number of incident edges (unweighted degree).
    pub fn incident_count(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    pub fn volume(&self) -> f64 {
        self.degrees.iter().sum()
    }

    /// `cut(A, V \ A)`.
    pub fn cut_value(&self, set: &VertexSet) -> f64 {
        debug_assert_eq!(set.universe(), self.n);
        self.edges
            .iter()
            .filter(|e| set.contains(e.i) != set.contains(e.j))
            .map(|e| e.w)
            .sum()
    }

    /// Cut of the cluster labelled `cluster` in an assignment vector.
    pub fn cut_of_cluster(&self, assignment: &[usize], cluster: usize) -> f64 {
        self.edges
            .iter()
            .filter(|e| (assignment[e.i] == cluster) != (assignment[e.j] == cluster))
            .map(|e| e.w)
            .sum()
    }

    /// Graph total variation `sum_{(i,j) in E} w_ij |f_i - f_j|`, the Lovász
    /// extension of the cut.
    pub fn total_variation(&self, f: &[f64]) -> Result<f64> {
        if f.len() != self.n {
            return invalid(format!("vector of length {} for graph with {} vertices", f.len(), self.n));
        }
        Ok(self.total_variation_unchecked(f))
    }

    pub(crate) fn total_variation_unchecked(&self, f: &[f64]) -> f64 {
        self.edges.iter().map(|e| e.w * (f[e.i] - f[e.j]).abs()).sum()
    }

    pub fn connected_components(&self) -> Vec<VertexSet> {
        let mut label = vec![usize::MAX; self.n];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..self.n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = count;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &(u, _) in &self.adjacency[v] {
                    if label[u] == usize::MAX {
                        label[u] = count;
                        stack.push(u);
                    }
                }
            }
            count += 1;
        }
        (0..count)
            .map(|c| VertexSet::from_predicate(self.n, |v| label[v] == c))
            .collect()
    }
}

/// Symmetric k-nearest-neighbour graph with Gaussian weights
/// `exp(-s |x - y|^2 / min(sigma_x^2, sigma_y^2))`, where `sigma_x` is the
/// distance from `x` to its k-th nearest neighbour.
///
/// The 0/1 neighbourhood relation is symmetrized first (union), then each
/// kept pair is weighted. Distance ties are broken by lower index.
pub fn build_knn_graph(points: &[Vec<f64>], k: usize, s: f64) -> Result<Graph> {
    let n = points.len();
    if k == 0 {
        return invalid("k must be positive");
    }
    if n < k + 1 {
        return invalid(format!("need at least {} points for a {k}-NN graph, got {n}", k + 1));
    }
    if !(s.is_finite() && s > 0.0) {
        return invalid(format!("scale must be positive, got {s}"));
    }
    let dim = points[0].len();
    for (idx, p) in points.iter().enumerate() {
        if p.len() != dim {
            return invalid(format!("point {idx} has dimension {} (expected {dim})", p.len()));
        }
        if p.iter().any(|x| !x.is_finite()) {
            return invalid(format!("point {idx} has a non-finite coordinate"));
        }
    }

    let sq_dist = |a: usize, b: usize| -> f64 {
        points[a].iter().zip(&points[b]).map(|(x, y)| (x - y) * (x - y)).sum()
    };

    // neighbours[x] = k nearest (squared distance, index), sorted.
    let mut neighbours: Vec<Vec<(f64, usize)>> = Vec::with_capacity(n);
    let mut row: Vec<(f64, usize)> = Vec::with_capacity(n);
    for x in 0..n {
        row.clear();
        row.extend((0..n).filter(|&y| y != x).map(|y| (sq_dist(x, y), y)));
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        row.select_nth_unstable_by(k - 1, cmp);
        let mut nearest = row[..k].to_vec();
        nearest.sort_by(cmp);
        neighbours.push(nearest);
    }

    let mut sigma_sq: Vec<f64> = neighbours.iter().map(|nb| nb[k - 1].0).collect();
    if sigma_sq.iter().any(|&v| v == 0.0) {
        let floor = neighbours
            .iter()
            .flat_map(|nb| nb.iter().map(|&(d, _)| d))
            .filter(|&d| d > 0.0)
            .fold(f64::INFINITY, f64::min);
        // All points coincide: every weight is exp(0) = 1 anyway.
        let floor = if floor.is_finite() { floor } else { 1.0 };
        for v in sigma_sq.iter_mut().filter(|v| **v == 0.0) {
            *v = floor;
        }
    }

    let mut pairs: Vec<(usize, usize, f64)> = neighbours
        .iter()
        .enumerate()
        .flat_map(|(x, nb)| nb.iter().map(move |&(d, y)| (x.min(y), x.max(y), d)))
        .collect();
    pairs.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    pairs.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);

    let edges = pairs.into_iter().filter_map(|(x, y, d)| {
        let w = (-s * d / sigma_sq[x].min(sigma_sq[y])).exp();
        (w >= MIN_KNN_WEIGHT).then_some((x, y, w))
    });
    Graph::from_edges(n, edges)
}

/// A subset of `{0, .., n-1}` stored as a membership mask.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    mask: Vec<bool>,
}

impl VertexSet {
    pub fn empty(n: usize) -> Self {
        Self { mask: vec![false; n] }
    }

    pub fn full(n: usize) -> Self {
        Self { mask: vec![true; n] }
    }

    pub fn from_indices(n: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut mask = vec![false; n];
        for v in indices {
            if v >= n {
                return invalid(format!("vertex {v} out of range for {n} vertices"));
            }
            mask[v] = true;
        }
        Ok(Self { mask })
    }

    pub fn from_predicate(n: usize, pred: impl Fn(usize) -> bool) -> Self {
        Self { mask: (0..n).map(pred).collect() }
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        Self { mask }
    }

    pub fn universe(&self) -> usize {
        self.mask.len()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.mask[v]
    }

    pub fn insert(&mut self, v: usize) {
        self.mask[v] = true;
    }

    pub fn remove(&mut self, v: usize) {
        self.mask[v] = false;
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, &b)| b).map(|(v, _)| v)
    }

    pub fn complement(&self) -> Self {
        Self { mask: self.mask.iter().map(|b| !b).collect() }
    }

    pub fn indicator(&self) -> Vec<f64> {
        self.mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }
}
