//! Independent reference implementations shared by the integration tests.
#![allow(dead_code, unused_imports)]

pub mod simplex;

use kcut::{BalanceKind, Graph, VertexSet};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub use simplex::{Lp, LpResult, Sense};

/// Connected graph on `n` vertices: a random spanning tree plus each other
/// pair with probability `p`. Integer weights in `1..=4` when `integer`.
pub fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize, p: f64, integer: bool) -> Graph {
    let weight = |rng: &mut ChaCha8Rng| if integer { rng.gen_range(1..=4) as f64 } else { rng.gen_range(0.1..2.0) };
    let mut edges = Vec::new();
    let mut present = vec![vec![false; n]; n];
    for v in 1..n {
        let u = rng.gen_range(0..v);
        present[u][v] = true;
        edges.push((u, v, weight(rng)));
    }
    for i in 0..n {
        for j in i + 1..n {
            if !present[i][j] && rng.gen_bool(p) {
                edges.push((i, j, weight(rng)));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

/// Weighted degrees computed from the edge list.
pub fn degrees(g: &Graph) -> Vec<f64> {
    let mut d = vec![0.0; g.n()];
    for e in g.edges() {
        d[e.i] += e.w;
        d[e.j] += e.w;
    }
    d
}

/// Balance of a vertex set from the textbook definitions.
pub fn set_balance(kind: BalanceKind, k: usize, g: &Graph, members: &[bool]) -> f64 {
    let w: Vec<f64> = if kind.is_normalized() { degrees(g) } else { vec![1.0; g.n()] };
    let inside: f64 = (0..g.n()).filter(|&i| members[i]).map(|i| w[i]).sum();
    let outside: f64 = (0..g.n()).filter(|&i| !members[i]).map(|i| w[i]).sum();
    match kind {
        BalanceKind::RatioCut | BalanceKind::NormalizedCut => inside,
        BalanceKind::RatioCheegerSym | BalanceKind::NormalizedCheegerSym => inside.min(outside),
        BalanceKind::RatioCheegerAsym | BalanceKind::NormalizedCheegerAsym => ((k - 1) as f64 * inside).min(outside),
    }
}

pub fn cut(g: &Graph, members: &[bool]) -> f64 {
    g.edges().iter().filter(|e| members[e.i] != members[e.j]).map(|e| e.w).sum()
}

pub fn total_variation(g: &Graph, f: &[f64]) -> f64 {
    g.edges().iter().map(|e| e.w * (f[e.i] - f[e.j]).abs()).sum()
}

/// Lovász extension by its defining sum over the decreasing rearrangement.
pub fn lovasz(kind: BalanceKind, k: usize, g: &Graph, f: &[f64]) -> f64 {
    let n = f.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| f[b].total_cmp(&f[a]));
    let mut members = vec![false; n];
    let mut previous = set_balance(kind, k, g, &members);
    let mut value = 0.0;
    for &i in &order {
        members[i] = true;
        let current = set_balance(kind, k, g, &members);
        value += f[i] * (current - previous);
        previous = current;
    }
    value
}

/// Smallest `cut(C) / S(C) + cut(C) / S(complement)` over nonempty strict subsets.
pub fn brute_force_two_cut(kind: BalanceKind, g: &Graph) -> (f64, Vec<bool>) {
    let n = g.n();
    let mut best = (f64::INFINITY, Vec::new());
    for mask in 1..(1u64 << n) - 1 {
        let members: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        let c = cut(g, &members);
        let comp: Vec<bool> = members.iter().map(|b| !b).collect();
        let value = c / set_balance(kind, 2, g, &members) + c / set_balance(kind, 2, g, &comp);
        if value < best.0 {
            best = (value, members);
        }
    }
    best
}

/// Subset minimizing `(k - 1) cut(C) / S(C) + cut(C) / S(complement)` for a
/// cardinality-based balance, enumerated in Gray-code order.
pub fn brute_force_degenerate_cut(kind: BalanceKind, k: usize, g: &Graph) -> (f64, VertexSet) {
    assert!(!kind.is_normalized());
    let n = g.n();
    let mut adj = vec![Vec::new(); n];
    for e in g.edges() {
        adj[e.i].push((e.j, e.w));
        adj[e.j].push((e.i, e.w));
    }
    let balance = |size: usize| -> f64 {
        let (inside, outside) = (size as f64, (n - size) as f64);
        match kind {
            BalanceKind::RatioCut => inside,
            BalanceKind::RatioCheegerSym => inside.min(outside),
            _ => ((k - 1) as f64 * inside).min(outside),
        }
    };
    let mut members = vec![false; n];
    let (mut size, mut cut_value) = (0usize, 0.0f64);
    let mut best = (f64::INFINITY, 0u64);
    let mut gray = 0u64;
    for step in 1u64..(1u64 << n) {
        let v = step.trailing_zeros() as usize;
        gray ^= 1 << v;
        let delta: f64 = adj[v].iter().map(|&(u, w)| if members[u] == members[v] { w } else { -w }).sum();
        members[v] = !members[v];
        cut_value += delta;
        size = if members[v] { size + 1 } else { size - 1 };
        if size == 0 || size == n {
            continue;
        }
        let value = (k - 1) as f64 * cut_value / balance(size) + cut_value / balance(n - size);
        if value < best.0 {
            best = (value, gray);
        }
    }
    let set = VertexSet::from_predicate(n, |i| best.1 >> i & 1 == 1);
    let exact = cut(g, set.mask());
    let value = (k - 1) as f64 * exact / balance(set.len()) + exact / balance(n - set.len());
    (value, set)
}

/// Three Gaussian blobs of `per` points in 10 dimensions with standard
/// deviation 0.3: two centers at distance 1 and a third at distance 4.
/// Returns points and blob labels.
pub fn three_gaussians(per: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut centers = [[0.0; 10]; 3];
    centers[1][0] = 1.0;
    centers[2][1] = 4.0;
    let mut rng = kcut::seed::rng(seed, kcut::seed::Stream::Init, 0);
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (b, c) in centers.iter().enumerate() {
        for _ in 0..per {
            let z: Vec<f64> = c.iter().map(|&x| {
                let z: f64 = StandardNormal.sample(&mut rng);
                x + 0.3 * z
            }).collect();
            points.push(z);
            labels.push(b);
        }
    }
    (points, labels)
}

/// The inner LP written out from its definition. Variable layout: `F` (n x k,
/// column-major here), then `alpha` (per column, per edge), then `delta+`,
/// then `delta-`.
pub struct ReferenceLp {
    pub lp: Lp,
    pub n: usize,
    pub k: usize,
    pub num_edges: usize,
}

impl ReferenceLp {
    pub fn f(&self, i: usize, l: usize) -> usize {
        l * self.n + i
    }
    pub fn alpha(&self, e: usize, l: usize) -> usize {
        self.n * self.k + l * self.num_edges + e
    }
    pub fn dplus(&self, l: usize) -> usize {
        self.n * self.k + self.k * self.num_edges + l
    }
    pub fn dminus(&self, l: usize) -> usize {
        self.dplus(l) + self.k
    }

    #[allow(clippy::too_many_arguments)]
    pub fn build(
        g: &Graph,
        k: usize,
        ratios: &[f64],
        subgradients: &[Vec<f64>],
        labels: &[Option<usize>],
        m: f64,
        big_m: f64,
    ) -> Self {
        let (n, ne) = (g.n(), g.num_edges());
        let mut r = ReferenceLp { lp: Lp::new(n * k + ne * k + 2 * k), n, k, num_edges: ne };
        for l in 0..k {
            let (plus, minus) = (r.dplus(l), r.dminus(l));
            r.lp.cost[plus] = 1.0;
            r.lp.cost[minus] = -1.0;
        }
        for l in 0..k {
            // <w, alpha_l> - lambda_l <s_l, F_l> - m delta+_l + M delta-_l <= 0
            let mut row: Vec<(usize, f64)> = g.edges().iter().enumerate().map(|(e, ed)| (r.alpha(e, l), ed.w)).collect();
            row.extend((0..n).map(|i| (r.f(i, l), -ratios[l] * subgradients[l][i])));
            row.push((r.dplus(l), -m));
            row.push((r.dminus(l), big_m));
            r.lp.add(row, Sense::Le, 0.0);
            // <s_l, F_l> >= m
            let row = (0..n).map(|i| (r.f(i, l), subgradients[l][i])).collect();
            r.lp.add(row, Sense::Ge, m);
            for (e, ed) in g.edges().iter().enumerate() {
                r.lp.add(vec![(r.f(ed.i, l), 1.0), (r.f(ed.j, l), -1.0), (r.alpha(e, l), -1.0)], Sense::Le, 0.0);
                r.lp.add(vec![(r.f(ed.i, l), -1.0), (r.f(ed.j, l), 1.0), (r.alpha(e, l), -1.0)], Sense::Le, 0.0);
            }
        }
        for i in 0..n {
            let row = (0..k).map(|l| (r.f(i, l), 1.0)).collect();
            r.lp.add(row, Sense::Eq, 1.0);
            if let Some(l) = labels[i] {
                r.lp.add(vec![(r.f(i, l), 1.0)], Sense::Eq, 1.0);
            }
        }
        r
    }
}

/// Point drawn uniformly from the probability simplex in `R^k`.
pub fn simplex_point(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// A random inner-LP instance: graph, balance kind, a row-stochastic iterate
/// respecting `labels`, and bounds `0 < m <= M` that the iterate satisfies.
pub struct LpInstance {
    pub graph: Graph,
    pub kind: BalanceKind,
    pub k: usize,
    pub f: kcut::Embedding,
    pub labels: Vec<Option<usize>>,
    pub m: f64,
    pub big_m: f64,
}

pub fn random_lp_instance(rng: &mut ChaCha8Rng, n_max: usize) -> LpInstance {
    let n = rng.gen_range(3..=n_max);
    let k = rng.gen_range(2..=3);
    let graph = random_connected_graph(rng, n, 0.35, false);
    let kind = BalanceKind::ALL[rng.gen_range(0..BalanceKind::ALL.len())];
    let labels: Vec<Option<usize>> = (0..n).map(|_| rng.gen_bool(0.2).then(|| rng.gen_range(0..k))).collect();
    let mut data = Vec::with_capacity(n * k);
    for label in &labels {
        match label {
            Some(l) => data.extend((0..k).map(|j| if j == *l { 1.0 } else { 0.0 })),
            None => data.extend(simplex_point(rng, k)),
        }
    }
    let f = kcut::Embedding::new(n, k, data).unwrap();
    let smallest = (0..k).map(|l| lovasz(kind, k, &graph, &f.column(l))).fold(f64::INFINITY, f64::min);
    let m = 0.5 * smallest.max(1e-3);
    let big_m = (4.0 * m).max(n as f64);
    LpInstance { graph, kind, k, f, labels, m, big_m }
}

/// `b*` written out from its definition: the donor keeps `C_l \ {i}`, the
/// best receiver gets `C_s + {i}`, all other ratios are the current ones.
pub fn brute_force_score(g: &Graph, kind: BalanceKind, k: usize, assign: &[usize], i: usize) -> f64 {
    let n = g.n();
    let l = assign[i];
    let members = |c: usize, a: &[usize]| -> Vec<bool> { (0..n).map(|v| a[v] == c).collect() };
    let ratio = |set: &[bool]| cut(g, set) / set_balance(kind, k, g, set);
    if assign.iter().filter(|&&c| c == l).count() == 1 {
        return f64::INFINITY;
    }
    let mut moved = assign.to_vec();
    let current: Vec<f64> = (0..k).map(|c| ratio(&members(c, assign))).collect();
    let mut best = f64::INFINITY;
    for s in (0..k).filter(|&s| s != l) {
        moved[i] = s;
        let mut value = ratio(&members(s, &moved));
        for (j, r) in current.iter().enumerate() {
            if j != l && j != s {
                value += r;
            }
        }
        best = best.min(value);
    }
    let mut without = assign.to_vec();
    without[i] = usize::MAX;
    ratio(&members(l, &without)) + best
}
