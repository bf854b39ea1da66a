use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::embedding::Embedding;
use crate::error::{invalid, Result};
use crate::graph::VertexSet;
use crate::seed::{self, Stream};

use super::rounding::TIE_TOL;

/// Vertices whose cluster is fixed (`I`) together with their labels (`L`).
///
/// Seeded labels come from ground truth and are never changed. `quota` is
/// the number of top-ranked vertices per cluster taken in the last growth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelConstraintSet {
    labels: Vec<Option<usize>>,
    seeded: Vec<bool>,
    quota: usize,
    capped: bool,
}

impl LabelConstraintSet {
    pub fn new(n: usize) -> Self {
        Self { labels: vec![None; n], seeded: vec![false; n], quota: 0, capped: false }
    }

    /// Permanent labels, e.g. sampled from ground truth.
    pub fn from_seeds(labels: Vec<Option<usize>>) -> Self {
        let seeded = labels.iter().map(Option::is_some).collect();
        Self { labels, seeded, quota: 0, capped: false }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> Option<usize> {
        self.labels[i]
    }

    pub fn is_seed(&self, i: usize) -> bool {
        self.seeded[i]
    }

    pub fn members(&self) -> VertexSet {
        VertexSet::from_predicate(self.n(), |i| self.labels[i].is_some())
    }

    /// Number of constrained vertices `|I|`.
    pub fn len(&self) -> usize {
        self.labels.iter().filter(|l| l.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_full(&self) -> bool {
        self.labels.iter().all(Option::is_some)
    }

    pub fn quota(&self) -> usize {
        self.quota
    }

    /// The last growth asked for more vertices than some cluster had.
    pub fn capped(&self) -> bool {
        self.capped
    }

    /// Pins every labeled row of `f` to its unit vector.
    pub fn apply(&self, f: &mut Embedding) {
        for (i, l) in self.labels.iter().enumerate() {
            if let Some(l) = *l {
                f.set_label(i, l);
            }
        }
    }
}

/// Doubles the per-cluster quota `p` (starting from 1) and adds the top-`p`
/// vertices of every ranking to `I`. New labels are the row argmax of
/// `f_source` (ties broken by `rng`); existing labels are kept. Labeled rows
/// of `f_source` are hard-set afterwards.
pub fn grow_membership<R: Rng>(
    lcs: &LabelConstraintSet,
    rankings: &[Vec<usize>],
    f_source: &mut Embedding,
    rng: &mut R,
) -> LabelConstraintSet {
    let mut next = lcs.clone();
    next.quota = (2 * lcs.quota).max(1);
    next.capped = false;
    for ranking in rankings {
        if next.quota > ranking.len() {
            next.capped = true;
        }
        for &i in ranking.iter().take(next.quota) {
            if next.labels[i].is_none() {
                let row = f_source.row(i);
                let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let tied: Vec<usize> = (0..row.len()).filter(|&l| row[l] >= best - TIE_TOL).collect();
                let pick = if tied.len() > 1 { tied[rng.gen_range(0..tied.len())] } else { tied[0] };
                next.labels[i] = Some(pick);
            }
        }
    }
    next.apply(f_source);
    next
}

/// How many ground-truth labels to reveal per class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SeedMode {
    PerClass(usize),
    /// Percentage of each class, rounded, at least one.
    Percent(f64),
}

/// Samples labeled vertices from `truth` (class indices below `k`).
pub fn transductive_seed(truth: &[usize], k: usize, mode: SeedMode, master_seed: u64) -> Result<LabelConstraintSet> {
    if let Some(&c) = truth.iter().find(|&&c| c >= k) {
        return invalid(format!("class {c} out of range for k = {k}"));
    }
    match mode {
        SeedMode::PerClass(0) => return invalid("labels per class must be positive"),
        SeedMode::Percent(p) if !(p > 0.0 && p <= 100.0) => {
            return invalid(format!("label percentage {p} outside (0, 100]"))
        }
        _ => {}
    }
    let mut labels = vec![None; truth.len()];
    for c in 0..k {
        let mut members: Vec<usize> = (0..truth.len()).filter(|&i| truth[i] == c).collect();
        if members.is_empty() {
            continue;
        }
        let count = match mode {
            SeedMode::PerClass(m) => m.min(members.len()),
            SeedMode::Percent(p) => ((p / 100.0 * members.len() as f64).round() as usize).clamp(1, members.len()),
        };
        let mut rng = seed::rng(master_seed, Stream::LabelSampling, c as u64);
        members.shuffle(&mut rng);
        for &i in &members[..count] {
            labels[i] = Some(c);
        }
    }
    Ok(LabelConstraintSet::from_seeds(labels))
}
