use rand::Rng;
use serde::Serialize;

use crate::balance::BalanceFunction;
use crate::embedding::Embedding;
use crate::error::{invalid, Result};
use crate::graph::{Graph, VertexSet};

/// Row entries within this distance of the row maximum count as tied.
pub const TIE_TOL: f64 = 1e-12;

/// Assignment of every vertex to one of `k` clusters. Clusters may be empty;
/// a valid k-partition has none empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    k: usize,
    assignment: Vec<usize>,
}

impl Partition {
    pub fn new(assignment: Vec<usize>, k: usize) -> Result<Self> {
        if let Some((i, c)) = assignment.iter().enumerate().find(|(_, &c)| c >= k) {
            return invalid(format!("vertex {i} assigned to cluster {c} >= k = {k}"));
        }
        Ok(Self { k, assignment })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }

    pub fn nonempty_clusters(&self) -> usize {
        self.cluster_sizes().iter().filter(|&&s| s > 0).count()
    }

    pub fn is_valid(&self) -> bool {
        self.nonempty_clusters() == self.k
    }

    pub fn cluster(&self, c: usize) -> VertexSet {
        VertexSet::from_predicate(self.n(), |i| self.assignment[i] == c)
    }
}

/// `sum_l cut(C_l) / S(C_l)`, or infinity unless `partition` is a valid
/// k-partition.
pub fn balanced_cut(graph: &Graph, balance: &BalanceFunction, partition: &Partition) -> f64 {
    if !partition.is_valid() || partition.n() != graph.n() {
        return f64::INFINITY;
    }
    (0..partition.k())
        .map(|c| {
            let s = balance.cluster_value(partition.assignment(), c);
            if s > 0.0 {
                graph.cut_of_cluster(partition.assignment(), c) / s
            } else {
                f64::INFINITY
            }
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundedResult {
    pub partition: Partition,
    /// Some row had more than one maximal entry.
    pub weak_degenerate: bool,
    /// Some cluster is empty.
    pub strong_degenerate: bool,
    pub bcut: f64,
}

impl RoundedResult {
    pub fn is_valid(&self) -> bool {
        !self.strong_degenerate
    }
}

/// Assigns each vertex to its row argmax; ties are broken uniformly at random.
pub fn round<R: Rng>(graph: &Graph, balance: &BalanceFunction, f: &Embedding, rng: &mut R) -> RoundedResult {
    let mut weak = false;
    let mut tied = Vec::with_capacity(f.k());
    let assignment = (0..f.n())
        .map(|i| {
            let row = f.row(i);
            let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            tied.clear();
            tied.extend((0..row.len()).filter(|&l| row[l] >= best - TIE_TOL));
            if tied.len() > 1 {
                weak = true;
                tied[rng.gen_range(0..tied.len())]
            } else {
                tied[0]
            }
        })
        .collect();
    let partition = Partition { k: f.k(), assignment };
    let strong = !partition.is_valid();
    let bcut = balanced_cut(graph, balance, &partition);
    RoundedResult { partition, weak_degenerate: weak, strong_degenerate: strong, bcut }
}
