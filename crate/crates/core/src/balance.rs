//! Balancing set functions and their Lovász extensions.
//!
//! All six supported kinds depend on a set only through its weight
//! `w(C) = sum_{i in C} w_i`, where `w_i = 1` for the ratio variants and
//! `w_i = d_i` (weighted degree) for the normalized ones. The balancing
//! function is then a concave piecewise-linear profile `g(w(C))`:
//!
//! | kind       | g(c)                       |
//! |------------|----------------------------|
//! | `rcut`     | c                          |
//! | `rcc-sym`  | min(c, W - c)              |
//! | `rcc-asym` | min((k - 1) c, W - c)      |
//!
//! with `W = w(V)`; `ncut`, `ncc-sym`, `ncc-asym` are the volume analogs.
//! A concave function of a modular weight is submodular, so every Lovász
//! extension here is convex.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{Graph, VertexSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BalanceKind {
    #[serde(rename = "rcut")]
    RatioCut,
    #[serde(rename = "rcc-sym")]
    RatioCheegerSym,
    #[serde(rename = "rcc-asym")]
    RatioCheegerAsym,
    #[serde(rename = "ncut")]
    NormalizedCut,
    #[serde(rename = "ncc-sym")]
    NormalizedCheegerSym,
    #[serde(rename = "ncc-asym")]
    NormalizedCheegerAsym,
}

impl BalanceKind {
    pub const ALL: [BalanceKind; 6] = [
        BalanceKind::RatioCut,
        BalanceKind::RatioCheegerSym,
        BalanceKind::RatioCheegerAsym,
        BalanceKind::NormalizedCut,
        BalanceKind::NormalizedCheegerSym,
        BalanceKind::NormalizedCheegerAsym,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BalanceKind::RatioCut => "rcut",
            BalanceKind::RatioCheegerSym => "rcc-sym",
            BalanceKind::RatioCheegerAsym => "rcc-asym",
            BalanceKind::NormalizedCut => "ncut",
            BalanceKind::NormalizedCheegerSym => "ncc-sym",
            BalanceKind::NormalizedCheegerAsym => "ncc-asym",
        }
    }

    pub fn is_normalized(self) -> bool {
        matches!(
            self,
            BalanceKind::NormalizedCut | BalanceKind::NormalizedCheegerSym | BalanceKind::NormalizedCheegerAsym
        )
    }

    /// `S(C) = S(V \ C)` for every C.
    pub fn is_symmetric(self) -> bool {
        matches!(self, BalanceKind::RatioCheegerSym | BalanceKind::NormalizedCheegerSym)
    }

    pub fn is_asymmetric_cheeger(self) -> bool {
        matches!(self, BalanceKind::RatioCheegerAsym | BalanceKind::NormalizedCheegerAsym)
    }
}

impl fmt::Display for BalanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BalanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BalanceKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown balance function '{s}'")))
    }
}

/// A balancing function bound to a graph (for its vertex weights) and to the
/// number of clusters `k` (used by the asymmetric kinds).
#[derive(Debug, Clone)]
pub struct BalanceFunction {
    kind: BalanceKind,
    k: usize,
    weights: Vec<f64>,
    total: f64,
}

impl BalanceFunction {
    pub fn new(kind: BalanceKind, k: usize, graph: &Graph) -> Result<Self> {
        let n = graph.n();
        if n < 2 {
            return invalid("balancing functions need at least two vertices");
        }
        if k < 2 || k > n {
            return invalid(format!("number of clusters must be in [2, {n}], got {k}"));
        }
        let weights = if kind.is_normalized() {
            if let Some(v) = graph.degrees().iter().position(|&d| d <= 0.0) {
                return invalid(format!("{kind} requires positive degrees; vertex {v} is isolated"));
            }
            graph.degrees().to_vec()
        } else {
            vec![1.0; n]
        };
        let total = weights.iter().rev().sum();
        Ok(Self { kind, k, weights, total })
    }

    pub fn kind(&self) -> BalanceKind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    /// The concave profile `g(c)` evaluated at a set weight `c`.
    fn profile(&self, c: f64) -> f64 {
        let rest = self.total - c;
        match self.kind {
            BalanceKind::RatioCut | BalanceKind::NormalizedCut => c,
            BalanceKind::RatioCheegerSym | BalanceKind::NormalizedCheegerSym => c.min(rest),
            BalanceKind::RatioCheegerAsym | BalanceKind::NormalizedCheegerAsym => {
                ((self.k - 1) as f64 * c).min(rest)
            }
        }
    }

    /// `S(C)`.
    pub fn set_value(&self, set: &VertexSet) -> f64 {
        debug_assert_eq!(set.universe(), self.n());
        // Accumulate by decreasing index: the same order the extension uses
        // for the top block of an indicator, so `S(1_C) == S(C)` bit for bit.
        let c = (0..self.n()).rev().filter(|&v| set.contains(v)).map(|v| self.weights[v]).fold(0.0, |a, w| a + w);
        if c == 0.0 {
            return 0.0;
        }
        self.profile(c)
    }

    /// `S(C_cluster)` for the cluster labelled `cluster` in an assignment vector.
    pub fn cluster_value(&self, assignment: &[usize], cluster: usize) -> f64 {
        let c = (0..self.n())
            .rev()
            .filter(|&v| assignment[v] == cluster)
            .map(|v| self.weights[v])
            .fold(0.0, |a, w| a + w);
        if c == 0.0 {
            return 0.0;
        }
        self.profile(c)
    }

    /// `S(C)` for a set given by its weight (`|C|` or `vol(C)`).
    pub fn value_of_weight(&self, c: f64) -> f64 {
        if c == 0.0 {
            0.0
        } else {
            self.profile(c)
        }
    }

    pub fn vertex_weight(&self, v: usize) -> f64 {
        self.weights[v]
    }

    /// Ascending order by value, ties by vertex index.
    fn order(f: &[f64]) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..f.len()).collect();
        idx.sort_by(|&a, &b| f[a].total_cmp(&f[b]).then(a.cmp(&b)));
        idx
    }

    /// Balancing values of the suffix sets `{pi(p), .., pi(n-1)}` for `p = 0..=n`.
    fn suffix_values(&self, order: &[usize]) -> Vec<f64> {
        let n = order.len();
        let mut vals = vec![0.0; n + 1];
        let mut c = 0.0;
        for p in (0..n).rev() {
            c += self.weights[order[p]];
            vals[p] = self.profile(c);
        }
        vals
    }

    /// Lovász extension `S(f)`.
    pub fn lovasz_value(&self, f: &[f64]) -> Result<f64> {
        self.check_len(f)?;
        Ok(self.lovasz_unchecked(f))
    }

    pub(crate) fn lovasz_unchecked(&self, f: &[f64]) -> f64 {
        let order = Self::order(f);
        let vals = self.suffix_values(&order);
        // Abel-summed form: f_(0) S(V) + sum_p (f_(p) - f_(p-1)) S(suffix p).
        let mut total = f[order[0]] * vals[0];
        for p in 1..order.len() {
            let step = f[order[p]] - f[order[p - 1]];
            if step != 0.0 {
                total += step * vals[p];
            }
        }
        total
    }

    /// Greedy subgradient: `s_pi(p) = S(suffix p) - S(suffix p+1)`.
    ///
    /// Satisfies `<s, f> = S(f)` and `<s, g> <= S(g)` for all g.
    pub fn subgradient(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f)?;
        Ok(self.subgradient_unchecked(f))
    }

    pub(crate) fn subgradient_unchecked(&self, f: &[f64]) -> Vec<f64> {
        let order = Self::order(f);
        let vals = self.suffix_values(&order);
        let mut s = vec![0.0; f.len()];
        for (p, &v) in order.iter().enumerate() {
            s[v] = vals[p] - vals[p + 1];
        }
        s
    }

    fn check_len(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.n() {
            return invalid(format!("vector of length {} for {} vertices", f.len(), self.n()));
        }
        Ok(())
    }

    /// Lower bound `m` on `S(C)` over the clusters of any valid k-partition.
    pub fn min_value(&self) -> f64 {
        let km1 = (self.k - 1) as f64;
        let w_min = self.weights.iter().copied().fold(f64::INFINITY, f64::min);
        match self.kind {
            BalanceKind::RatioCut | BalanceKind::RatioCheegerSym => 1.0,
            BalanceKind::RatioCheegerAsym => km1,
            BalanceKind::NormalizedCut | BalanceKind::NormalizedCheegerSym => w_min,
            BalanceKind::NormalizedCheegerAsym => km1 * w_min,
        }
    }

    /// Upper bound `M >= max_{f in [0,1]^n} S(f)`.
    pub fn max_value(&self) -> f64 {
        let km1 = (self.k - 1) as f64;
        let kf = self.k as f64;
        match self.kind {
            BalanceKind::RatioCut | BalanceKind::NormalizedCut => self.total,
            BalanceKind::RatioCheegerSym => (self.n() / 2) as f64,
            BalanceKind::NormalizedCheegerSym => self.total / 2.0,
            BalanceKind::RatioCheegerAsym => {
                let n = self.n();
                (0..=n).map(|c| (self.k - 1) * c).zip((0..=n).rev()).map(|(a, b)| a.min(b)).max().unwrap_or(0)
                    as f64
            }
            BalanceKind::NormalizedCheegerAsym => km1 * self.total / kf,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_graph(n: usize) -> Graph {
        Graph::from_edges(n, (0..n - 1).map(|i| (i, i + 1, 1.0))).unwrap()
    }

    fn triangle() -> Graph {
        Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    #[test]
    fn set_values() {
        let g = unit_graph(6);
        let c = VertexSet::from_indices(6, [1, 4]).unwrap();
        let rcut = BalanceFunction::new(BalanceKind::RatioCut, 3, &g).unwrap();
        assert_eq!(rcut.set_value(&c), 2.0);
        let asym = BalanceFunction::new(BalanceKind::RatioCheegerAsym, 3, &g).unwrap();
        assert_eq!(asym.set_value(&c), 4.0);
        let ncut = BalanceFunction::new(BalanceKind::NormalizedCut, 2, &triangle()).unwrap();
        assert_eq!(ncut.set_value(&VertexSet::from_indices(3, [0]).unwrap()), 2.0);
    }

    #[test]
    fn constants() {
        let g = unit_graph(7);
        let b = |kind, k| BalanceFunction::new(kind, k, &g).unwrap();
        assert_eq!(b(BalanceKind::RatioCut, 3).min_value(), 1.0);
        assert_eq!(b(BalanceKind::RatioCut, 3).max_value(), 7.0);
        assert_eq!(b(BalanceKind::RatioCheegerSym, 3).min_value(), 1.0);
        assert_eq!(b(BalanceKind::RatioCheegerSym, 3).max_value(), 3.0);
        assert_eq!(b(BalanceKind::RatioCheegerAsym, 3).min_value(), 2.0);
        // max_c min(2c, 7 - c): c = 2 -> 4, c = 3 -> 4.
        assert_eq!(b(BalanceKind::RatioCheegerAsym, 3).max_value(), 4.0);
        // degrees of a 7-path: 1, 2, 2, 2, 2, 2, 1
        assert_eq!(b(BalanceKind::NormalizedCut, 3).min_value(), 1.0);
        assert_eq!(b(BalanceKind::NormalizedCheegerAsym, 3).min_value(), 2.0);
        assert_eq!(b(BalanceKind::NormalizedCut, 3).max_value(), 12.0);
    }

    #[test]
    fn extension_on_indicator_and_scaling() {
        let g = unit_graph(5);
        for kind in BalanceKind::ALL {
            let bf = BalanceFunction::new(kind, 3, &g).unwrap();
            let c = VertexSet::from_indices(5, [0, 3]).unwrap();
            assert_eq!(bf.lovasz_value(&c.indicator()).unwrap(), bf.set_value(&c));
            let f = [0.1, 0.7, 0.3, 0.9, 0.0];
            let f2: Vec<f64> = f.iter().map(|x| 2.0 * x).collect();
            let (a, b) = (bf.lovasz_value(&f).unwrap(), bf.lovasz_value(&f2).unwrap());
            assert!((b - 2.0 * a).abs() < 1e-12, "{kind}: {a} {b}");
        }
    }

    #[test]
    fn subgradient_telescopes_and_constant_input_is_deterministic() {
        let g = unit_graph(5);
        for kind in BalanceKind::ALL {
            let bf = BalanceFunction::new(kind, 2, &g).unwrap();
            let f = [0.4; 5];
            let s = bf.subgradient(&f).unwrap();
            assert_eq!(s, bf.subgradient(&f).unwrap());
            let sum: f64 = s.iter().sum();
            let full = bf.set_value(&VertexSet::full(5));
            assert!((sum - full).abs() < 1e-12);
            let dot: f64 = s.iter().zip(&f).map(|(a, b)| a * b).sum();
            assert!((dot - bf.lovasz_value(&f).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let bf = BalanceFunction::new(BalanceKind::RatioCut, 2, &unit_graph(4)).unwrap();
        assert!(bf.lovasz_value(&[0.0; 3]).is_err());
        assert!(bf.subgradient(&[0.0; 5]).is_err());
    }

    #[test]
    fn parse_names() {
        for kind in BalanceKind::ALL {
            assert_eq!(kind.name().parse::<BalanceKind>().unwrap(), kind);
        }
        assert!("cheeger".parse::<BalanceKind>().is_err());
    }

    #[test]
    fn normalized_kinds_reject_isolated_vertices() {
        let g = Graph::from_edges(3, [(0, 1, 1.0)]).unwrap();
        assert!(BalanceFunction::new(BalanceKind::NormalizedCut, 2, &g).is_err());
        assert!(BalanceFunction::new(BalanceKind::RatioCut, 2, &g).is_ok());
    }
}
