use anyhow::{bail, Result};
use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;

/// Percentage of vertices misclassified under the best one-to-one matching
/// of predicted clusters to classes.
pub fn clustering_error(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        bail!("prediction has {} entries, ground truth has {}", pred.len(), truth.len());
    }
    if pred.is_empty() {
        bail!("cannot evaluate an empty clustering");
    }
    let size = 1 + pred.iter().chain(truth).copied().max().unwrap_or(0);
    let mut counts = Matrix::new(size, size, 0i64);
    for (&p, &t) in pred.iter().zip(truth) {
        counts[(p, t)] += 1;
    }
    let (matched, _) = kuhn_munkres(&counts);
    Ok(100.0 * (pred.len() as i64 - matched) as f64 / pred.len() as f64)
}
