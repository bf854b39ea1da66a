use crate::balance::BalanceFunction;
use crate::embedding::Embedding;
use crate::error::{invalid, Result};
use crate::graph::{Graph, VertexSet};

fn check(k: usize, two_cut: &VertexSet, n: usize) -> Result<()> {
    if k < 2 {
        return invalid(format!("k = {k} must be at least 2"));
    }
    if two_cut.universe() != n {
        return invalid(format!("vertex set over {} vertices, graph has {n}", two_cut.universe()));
    }
    if two_cut.is_empty() || two_cut.len() == n {
        return invalid("the 2-cut must be a nonempty strict subset");
    }
    Ok(())
}

/// Non-partition embedding built from a 2-cut `(C, complement)`: column 0 is
/// the indicator of the complement and the remaining `k - 1` columns share
/// the indicator of `C` equally. Rounding it leaves `k - 2` clusters empty.
pub fn construct_degenerate_embedding(graph: &Graph, k: usize, two_cut: &VertexSet) -> Result<Embedding> {
    check(k, two_cut, graph.n())?;
    let share = 1.0 / (k - 1) as f64;
    let mut data = vec![0.0; graph.n() * k];
    for i in 0..graph.n() {
        let row = &mut data[i * k..(i + 1) * k];
        if two_cut.contains(i) {
            row[1..].fill(share);
        } else {
            row[0] = 1.0;
        }
    }
    Embedding::new(graph.n(), k, data)
}

/// Objective of [`construct_degenerate_embedding`]:
/// `(k - 1) cut(C) / S(C) + cut(C) / S(complement)`.
pub fn degenerate_objective(graph: &Graph, balance: &BalanceFunction, k: usize, two_cut: &VertexSet) -> Result<f64> {
    check(k, two_cut, graph.n())?;
    let cut = graph.cut_value(two_cut);
    let inside = balance.set_value(two_cut);
    let outside = balance.set_value(&two_cut.complement());
    Ok((k - 1) as f64 * cut / inside + cut / outside)
}
