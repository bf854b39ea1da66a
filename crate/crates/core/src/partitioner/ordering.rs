use crate::balance::BalanceFunction;
use crate::error::{invalid, Result};
use crate::graph::Graph;

use super::rounding::Partition;

/// Score `b*` of every vertex: the smallest balanced cut reachable by moving
/// the vertex out of its cluster `l` into some other cluster `s`, with the
/// ratios of all clusters other than `l` and `s` held at their current value.
///
/// A move that would leave cluster `l` empty, or give a modified cluster a
/// zero balance value, scores `+inf`.
pub fn vertex_scores(graph: &Graph, balance: &BalanceFunction, partition: &Partition) -> Result<Vec<f64>> {
    let (n, k) = (graph.n(), partition.k());
    if partition.n() != n {
        return invalid(format!("partition has {} vertices, graph has {n}", partition.n()));
    }
    if !partition.is_valid() {
        return invalid("vertex ordering needs a valid k-partition");
    }
    let assign = partition.assignment();
    let sizes = partition.cluster_sizes();

    let mut weight = vec![0.0; k];
    for i in (0..n).rev() {
        weight[assign[i]] += balance.vertex_weight(i);
    }
    let cut: Vec<f64> = (0..k).map(|c| graph.cut_of_cluster(assign, c)).collect();
    let ratio: Vec<f64> = (0..k).map(|c| cut[c] / balance.value_of_weight(weight[c])).collect();
    let div = |num: f64, den: f64| if den > 0.0 { num / den } else { f64::INFINITY };

    let mut conn = vec![0.0; k];
    let scores = (0..n)
        .map(|i| {
            let l = assign[i];
            if sizes[l] == 1 {
                return f64::INFINITY;
            }
            conn.fill(0.0);
            for &(j, e) in graph.neighbors(i) {
                conn[assign[j]] += graph.edges()[e].w;
            }
            let total: f64 = conn.iter().sum();
            let w_i = balance.vertex_weight(i);

            let out_cut = cut[l] - (total - conn[l]) + conn[l];
            let first = div(out_cut, balance.value_of_weight(weight[l] - w_i));
            let best = (0..k)
                .filter(|&s| s != l)
                .map(|s| {
                    let in_cut = cut[s] + (total - conn[s]) - conn[s];
                    let mut value = div(in_cut, balance.value_of_weight(weight[s] + w_i));
                    for (j, r) in ratio.iter().enumerate() {
                        if j != l && j != s {
                            value += r;
                        }
                    }
                    value
                })
                .fold(f64::INFINITY, f64::min);
            first + best
        })
        .collect();
    Ok(scores)
}

/// Per-cluster rankings: the vertices of each cluster sorted by decreasing
/// `b*`, ties resolved toward the smaller vertex index.
pub fn vertex_ordering(graph: &Graph, balance: &BalanceFunction, partition: &Partition) -> Result<Vec<Vec<usize>>> {
    let scores = vertex_scores(graph, balance, partition)?;
    let mut rankings = vec![Vec::new(); partition.k()];
    for (i, &c) in partition.assignment().iter().enumerate() {
        rankings[c].push(i);
    }
    for r in &mut rankings {
        r.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    }
    Ok(rankings)
}
