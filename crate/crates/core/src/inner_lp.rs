//! The convex inner problem of the descent scheme, written as an LP and
//! solved with diagonally preconditioned PDHG.
//!
//! For the current iterate `F^t` with ratios `lambda_l = TV(F_l^t) / S(F_l^t)`
//! and subgradients `s_l in dS(F_l^t)` the LP is
//!
//! ```text
//! min  sum_l dplus_l - dminus_l
//! s.t. <w, alpha_l> <= lambda_l <s_l, F_l> + m dplus_l - M dminus_l   (descent, dual theta)
//!      sum_l F_il = 1                                                  (simplex, dual mu)
//!      F_{i j_i} = 1 for (i, j_i) in L                                 (labels, dual zeta)
//!      <s_l, F_l> >= m                                                 (size, dual nu)
//!      F_il - F_jl <= alpha_l,e ,  F_jl - F_il <= alpha_l,e            (per edge, duals eta, xi)
//!      F, alpha, dplus, dminus >= 0
//! ```
//!
//! The constraint matrix is never formed; each PDHG iteration costs
//! `O(|E| k + n k)`.

use serde::Serialize;

use crate::balance::BalanceFunction;
use crate::embedding::Embedding;
use crate::error::{invalid, Error, Result};
use crate::graph::Graph;

/// Relative slack allowed on `S(F_l^t) >= m` when assembling.
pub const SIZE_FEASIBILITY_TOL: f64 = 1e-6;

/// How label constraints `F_{i j_i} = 1` enter the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelHandling {
    /// Labeled rows are fixed to unit vectors and removed from the variables.
    #[default]
    Eliminate,
    /// Labeled rows stay variables with explicit equality duals `zeta`.
    Explicit,
}

#[derive(Debug, Clone)]
pub struct LpProblem<'g> {
    graph: &'g Graph,
    k: usize,
    reference: Embedding,
    ratios: Vec<f64>,
    /// Row-major `n x k`: `subgradients[i * k + l] = (s_l)_i`.
    subgradients: Vec<f64>,
    labels: Vec<Option<usize>>,
    m: f64,
    big_m: f64,
}

/// Builds the inner LP around the iterate `current`.
///
/// `m` is the size-constraint bound and `big_m` the upper bound on `S`.
/// Fails with [`Error::InfeasibleIterate`] if some column has `S(F_l) < m`.
pub fn assemble<'g>(
    graph: &'g Graph,
    balance: &BalanceFunction,
    current: &Embedding,
    labels: &[Option<usize>],
    m: f64,
    big_m: f64,
) -> Result<LpProblem<'g>> {
    let (n, k) = (current.n(), current.k());
    if n != graph.n() || n != balance.n() {
        return invalid("graph, balance function and embedding disagree on n");
    }
    if labels.len() != n {
        return invalid(format!("label vector has length {}, expected {n}", labels.len()));
    }
    if let Some((i, &Some(l))) = labels.iter().enumerate().find(|(_, l)| l.is_some_and(|l| l >= k)) {
        return invalid(format!("vertex {i} labeled with cluster {l} >= k"));
    }
    if !(m > 0.0 && big_m >= m) {
        return invalid(format!("need 0 < m <= M, got m = {m}, M = {big_m}"));
    }
    let mut ratios = Vec::with_capacity(k);
    let mut subgradients = vec![0.0; n * k];
    for l in 0..k {
        let col = current.column(l);
        let s_val = balance.lovasz_unchecked(&col);
        if !(s_val >= m * (1.0 - SIZE_FEASIBILITY_TOL)) {
            return Err(Error::InfeasibleIterate { column: l, value: s_val, min: m });
        }
        ratios.push(graph.total_variation_unchecked(&col) / s_val);
        for (i, s) in balance.subgradient_unchecked(&col).into_iter().enumerate() {
            subgradients[i * k + l] = s;
        }
    }
    Ok(LpProblem {
        graph,
        k,
        reference: current.clone(),
        ratios,
        subgradients,
        labels: labels.to_vec(),
        m,
        big_m,
    })
}

impl<'g> LpProblem<'g> {
    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn subgradient(&self, i: usize, l: usize) -> f64 {
        self.subgradients[i * self.k + l]
    }

    pub fn subgradient_column(&self, l: usize) -> Vec<f64> {
        (0..self.n()).map(|i| self.subgradient(i, l)).collect()
    }

    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    /// Label pairs `(i, j_i)` in vertex order.
    pub fn label_pairs(&self) -> Vec<(usize, usize)> {
        self.labels.iter().enumerate().filter_map(|(i, l)| l.map(|l| (i, l))).collect()
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn big_m(&self) -> f64 {
        self.big_m
    }

    /// The iterate the LP was linearized at.
    pub fn reference(&self) -> &Embedding {
        &self.reference
    }

    /// `<s_l, F_l>` for a row-major matrix.
    fn linear_size(&self, f: &[f64], l: usize) -> f64 {
        let k = self.k;
        (0..self.n()).map(|i| self.subgradients[i * k + l] * f[i * k + l]).sum()
    }

    fn weighted_alpha(&self, alpha: &[f64], l: usize) -> f64 {
        let k = self.k;
        self.graph.edges().iter().enumerate().map(|(e, edge)| edge.w * alpha[e * k + l]).sum()
    }

    /// Slack of each descent constraint, `rhs - lhs` (non-negative when satisfied).
    pub fn descent_slack(&self, state: &LpState) -> Vec<f64> {
        (0..self.k)
            .map(|l| {
                self.ratios[l] * self.linear_size(&state.f, l) + self.m * state.dplus[l]
                    - self.big_m * state.dminus[l]
                    - self.weighted_alpha(&state.alpha, l)
            })
            .collect()
    }

    /// Violations of every constraint group at `state`, unscaled.
    pub fn violations(&self, state: &LpState) -> Violations {
        let (n, k) = (self.n(), self.k);
        let f = &state.f;
        let simplex = (0..n)
            .map(|i| (f[i * k..(i + 1) * k].iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max);
        let label = self
            .label_pairs()
            .into_iter()
            .map(|(i, l)| (f[i * k + l] - 1.0).abs())
            .fold(0.0, f64::max);
        let descent = self.descent_slack(state).into_iter().map(|s| (-s).max(0.0)).fold(0.0, f64::max);
        let size = (0..k).map(|l| (self.m - self.linear_size(f, l)).max(0.0)).fold(0.0, f64::max);
        let mut edge = 0.0f64;
        for (e, ed) in self.graph.edges().iter().enumerate() {
            for l in 0..k {
                let d = (f[ed.i * k + l] - f[ed.j * k + l]).abs();
                edge = edge.max(d - state.alpha[e * k + l]);
            }
        }
        let negativity = f
            .iter()
            .chain(&state.alpha)
            .chain(&state.dplus)
            .chain(&state.dminus)
            .map(|&x| (-x).max(0.0))
            .fold(0.0, f64::max);
        Violations { simplex, label, descent, size, edge, negativity }
    }

    /// A lower bound on the LP optimum from the duals in `state`.
    ///
    /// Simplex rows and labels stay as constraints on `F`; the other rows are
    /// dualized with `theta` clamped to `[1/M, 1/m]`, `nu >= 0` and
    /// `eta + xi <= theta w` per edge, which keeps every reduced cost of
    /// `alpha`, `dplus` and `dminus` non-negative. Valid for any `state`.
    pub fn dual_bound(&self, state: &LpState) -> f64 {
        let (n, k) = (self.n(), self.k);
        let theta: Vec<f64> = state.theta.iter().map(|&t| t.clamp(1.0 / self.big_m, 1.0 / self.m)).collect();
        let nu: Vec<f64> = state.nu.iter().map(|&v| v.max(0.0)).collect();
        let mut cost = vec![0.0; n * k];
        for i in 0..n {
            for l in 0..k {
                cost[i * k + l] = -(theta[l] * self.ratios[l] + nu[l]) * self.subgradients[i * k + l];
            }
        }
        for (e, ed) in self.graph.edges().iter().enumerate() {
            for l in 0..k {
                let (mut eta, mut xi) = (state.eta[e * k + l].max(0.0), state.xi[e * k + l].max(0.0));
                let cap = theta[l] * ed.w;
                if eta + xi > cap {
                    let scale = cap / (eta + xi);
                    eta *= scale;
                    xi *= scale;
                }
                cost[ed.i * k + l] += eta - xi;
                cost[ed.j * k + l] -= eta - xi;
            }
        }
        let rows: f64 = (0..n)
            .map(|i| match self.labels[i] {
                Some(l) => cost[i * k + l],
                None => cost[i * k..(i + 1) * k].iter().copied().fold(f64::INFINITY, f64::min),
            })
            .sum();
        rows + self.m * nu.iter().sum::<f64>()
    }
}

/// Per-group infinity norms of constraint violation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Violations {
    pub simplex: f64,
    pub label: f64,
    pub descent: f64,
    pub size: f64,
    pub edge: f64,
    pub negativity: f64,
}

impl Violations {
    pub fn max(&self) -> f64 {
        [self.simplex, self.label, self.descent, self.size, self.edge, self.negativity]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Diagonal step sizes. Primal `tau_*`, dual `sigma_*`.
#[derive(Debug, Clone, PartialEq)]
pub struct Preconditioners {
    /// Row-major `n x k`.
    pub tau_f: Vec<f64>,
    /// Per edge, shared by all columns.
    pub tau_alpha: Vec<f64>,
    pub tau_dplus: Vec<f64>,
    pub tau_dminus: Vec<f64>,
    pub sigma_theta: Vec<f64>,
    pub sigma_mu: f64,
    pub sigma_zeta: f64,
    pub sigma_nu: Vec<f64>,
    /// Shared by the `eta` and `xi` blocks.
    pub sigma_edge: f64,
}

/// Closed-form preconditioners: `tau_j = 1 / sum_i |A_ij|`, `sigma_i = 1 / sum_j |A_ij|`.
///
/// `(tau_F,l)_i = 1 / ((1 + lambda_l)|(s_l)_i| + 2 deg_i + rho_il + 1)` where
/// `deg_i` counts incident edges and `rho_il = 1` only for an explicit label
/// constraint on `(i, l)`.
pub fn compute_preconditioners(p: &LpProblem<'_>, handling: LabelHandling) -> Preconditioners {
    let (n, k) = (p.n(), p.k);
    let g = p.graph;
    let mut tau_f = vec![0.0; n * k];
    for i in 0..n {
        let deg = g.incident_count(i) as f64;
        for l in 0..k {
            let rho = match (handling, p.labels[i]) {
                (LabelHandling::Explicit, Some(j)) if j == l => 1.0,
                _ => 0.0,
            };
            let s = p.subgradients[i * k + l].abs();
            tau_f[i * k + l] = 1.0 / ((1.0 + p.ratios[l]) * s + 2.0 * deg + rho + 1.0);
        }
    }
    let tau_alpha = g.edges().iter().map(|e| 1.0 / (e.w + 2.0)).collect();
    let total_w = g.total_weight();
    let abs_sum: Vec<f64> = (0..k).map(|l| (0..n).map(|i| p.subgradients[i * k + l].abs()).sum()).collect();
    let sigma_theta = (0..k)
        .map(|l| 1.0 / (total_w + p.ratios[l] * abs_sum[l] + p.m + p.big_m))
        .collect();
    // A zero subgradient leaves the size row empty; any positive step is valid then.
    let sigma_nu = abs_sum.iter().map(|&a| if a > 0.0 { 1.0 / a } else { 1.0 }).collect();
    Preconditioners {
        tau_f,
        tau_alpha,
        tau_dplus: vec![1.0 / p.m; k],
        tau_dminus: vec![1.0 / p.big_m; k],
        sigma_theta,
        sigma_mu: 1.0 / k as f64,
        sigma_zeta: 1.0,
        sigma_nu,
        sigma_edge: 1.0 / 3.0,
    }
}

/// Primal and dual PDHG variables.
#[derive(Debug, Clone, PartialEq)]
pub struct LpState {
    /// Row-major `n x k`.
    pub f: Vec<f64>,
    /// Edge-major `|E| x k`.
    pub alpha: Vec<f64>,
    pub dplus: Vec<f64>,
    pub dminus: Vec<f64>,
    pub theta: Vec<f64>,
    pub mu: Vec<f64>,
    /// One entry per vertex; only labeled vertices use theirs.
    pub zeta: Vec<f64>,
    pub nu: Vec<f64>,
    pub eta: Vec<f64>,
    pub xi: Vec<f64>,
}

impl LpState {
    /// The feasible starting point `F = F^t`, `alpha = |F_i - F_j|`,
    /// `dplus = dminus = 0`, all duals zero.
    pub fn cold(p: &LpProblem<'_>) -> Self {
        let (n, k, e) = (p.n(), p.k, p.graph.num_edges());
        let mut state = Self {
            f: Vec::new(),
            alpha: Vec::new(),
            dplus: vec![0.0; k],
            dminus: vec![0.0; k],
            theta: vec![0.0; k],
            mu: vec![0.0; n],
            zeta: vec![0.0; n],
            nu: vec![0.0; k],
            eta: vec![0.0; e * k],
            xi: vec![0.0; e * k],
        };
        state.reset_primal(p);
        state
    }

    /// Primal part reset to the feasible start, duals reused from `previous`.
    pub fn warm(p: &LpProblem<'_>, previous: &LpState) -> Self {
        let mut state = Self::cold(p);
        if previous.theta.len() == p.k && previous.mu.len() == p.n() && previous.eta.len() == state.eta.len() {
            state.theta.clone_from(&previous.theta);
            state.mu.clone_from(&previous.mu);
            state.zeta.clone_from(&previous.zeta);
            state.nu.clone_from(&previous.nu);
            state.eta.clone_from(&previous.eta);
            state.xi.clone_from(&previous.xi);
        }
        state
    }

    fn reset_primal(&mut self, p: &LpProblem<'_>) {
        let k = p.k;
        let mut f = p.reference.data().to_vec();
        for (i, l) in p.labels.iter().enumerate() {
            if let Some(l) = *l {
                f[i * k..(i + 1) * k].fill(0.0);
                f[i * k + l] = 1.0;
            }
        }
        let mut alpha = vec![0.0; p.graph.num_edges() * k];
        for (e, ed) in p.graph.edges().iter().enumerate() {
            for l in 0..k {
                alpha[e * k + l] = (f[ed.i * k + l] - f[ed.j * k + l]).abs();
            }
        }
        self.f = f;
        self.alpha = alpha;
        self.dplus.fill(0.0);
        self.dminus.fill(0.0);
    }

    pub fn objective(&self) -> f64 {
        self.dplus.iter().zip(&self.dminus).map(|(a, b)| a - b).sum()
    }

    fn all_finite(&self) -> bool {
        [&self.f, &self.alpha, &self.dplus, &self.dminus, &self.theta, &self.mu, &self.zeta, &self.nu, &self.eta, &self.xi]
            .iter()
            .all(|v| v.iter().all(|x| x.is_finite()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdhgSettings {
    pub tol: f64,
    pub max_iter: usize,
    /// Convergence is tested every this many iterations.
    pub check_every: usize,
    pub labels: LabelHandling,
    pub record_residuals: bool,
}

impl Default for PdhgSettings {
    fn default() -> Self {
        Self { tol: 1e-6, max_iter: 50_000, check_every: 10, labels: LabelHandling::Eliminate, record_residuals: false }
    }
}

/// Residuals of one PDHG iteration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Residuals {
    /// Largest dual-variable change; each is `sigma`-scaled constraint violation at the extrapolated point.
    pub primal: f64,
    /// Largest primal-variable change; each is `tau`-scaled reduced cost.
    pub dual: f64,
    /// Largest constraint violation scaled by its row preconditioner.
    pub violation: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.violation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualRecord {
    pub iteration: usize,
    pub primal: f64,
    pub dual: f64,
    /// Step length `||z+ - z||_M` in the preconditioned metric
    /// `M = [[T^-1, -A^T], [-A, Sigma^-1]]`; non-increasing along PDHG.
    pub fixed_point: f64,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub state: LpState,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub residuals: Residuals,
    pub violations: Violations,
    pub history: Vec<ResidualRecord>,
}

impl LpSolution {
    pub fn embedding(&self, p: &LpProblem<'_>) -> Embedding {
        Embedding::from_raw(p.n(), p.k, self.state.f.clone())
    }
}

fn scaled_violation(p: &LpProblem<'_>, pre: &Preconditioners, state: &LpState) -> f64 {
    let v = p.violations(state);
    let k = p.k as f64;
    let theta = pre.sigma_theta.iter().copied().fold(0.0, f64::max);
    let nu = pre.sigma_nu.iter().copied().fold(0.0, f64::max);
    [
        v.simplex / k,
        v.label * pre.sigma_zeta,
        v.descent * theta,
        v.size * nu,
        v.edge * pre.sigma_edge,
        v.negativity,
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

struct Workspace {
    free: Vec<usize>,
    fbar: Vec<f64>,
    abar: Vec<f64>,
    dpbar: Vec<f64>,
    dmbar: Vec<f64>,
    edge_grad: Vec<f64>,
    s_f_fixed: Vec<f64>,
    s_f: Vec<f64>,
    w_alpha: Vec<f64>,
    coef: Vec<f64>,
}

#[inline(always)]
fn track<const TRACK: bool>(acc: &mut f64, delta: f64) {
    if TRACK {
        *acc = acc.max(delta.abs());
    }
}

/// One PDHG iteration. With `TRACK` the largest primal and dual changes are
/// returned; otherwise both are zero.
fn pdhg_iteration<const TRACK: bool>(
    p: &LpProblem<'_>,
    pre: &Preconditioners,
    explicit: bool,
    x: &mut LpState,
    ws: &mut Workspace,
) -> (f64, f64) {
    let k = p.k;
    let edges = p.graph.edges();
    let mut dx = 0.0f64;
    let mut dy = 0.0f64;

    // Primal step x <- max(0, x - tau (A^T y + c)), fused with the dual step
    // of the row-sum multipliers, which only touch their own row.
    for l in 0..k {
        ws.coef[l] = -(x.theta[l] * p.ratios[l] + x.nu[l]);
    }
    ws.s_f.copy_from_slice(&ws.s_f_fixed);
    for &i in &ws.free {
        let mut row_sum = 0.0;
        let mu = x.mu[i];
        for l in 0..k {
            let idx = i * k + l;
            let mut grad = ws.coef[l] * p.subgradients[idx] + mu + ws.edge_grad[idx];
            if explicit && p.labels[i] == Some(l) {
                grad += x.zeta[i];
            }
            let old = x.f[idx];
            let new = (old - pre.tau_f[idx] * grad).max(0.0);
            x.f[idx] = new;
            let bar = 2.0 * new - old;
            ws.fbar[idx] = bar;
            row_sum += bar;
            ws.s_f[l] += p.subgradients[idx] * bar;
            track::<TRACK>(&mut dx, new - old);
        }
        let delta = pre.sigma_mu * (row_sum - 1.0);
        x.mu[i] += delta;
        track::<TRACK>(&mut dy, delta);
        if explicit {
            if let Some(l) = p.labels[i] {
                let delta = pre.sigma_zeta * (ws.fbar[i * k + l] - 1.0);
                x.zeta[i] += delta;
                track::<TRACK>(&mut dy, delta);
            }
        }
    }
    ws.w_alpha.fill(0.0);
    let theta = &x.theta[..k];
    let rows = x.alpha.chunks_exact_mut(k).zip(ws.abar.chunks_exact_mut(k)).zip(x.eta.chunks_exact(k).zip(x.xi.chunks_exact(k)));
    for ((ed, &tau), ((alpha, abar), (eta, xi))) in edges.iter().zip(&pre.tau_alpha).zip(rows) {
        for l in 0..k {
            let grad = theta[l] * ed.w - eta[l] - xi[l];
            let old = alpha[l];
            let new = (old - tau * grad).max(0.0);
            alpha[l] = new;
            let bar = 2.0 * new - old;
            abar[l] = bar;
            ws.w_alpha[l] += ed.w * bar;
            track::<TRACK>(&mut dx, new - old);
        }
    }
    for l in 0..k {
        let old = x.dplus[l];
        let new = (old - pre.tau_dplus[l] * (1.0 - p.m * x.theta[l])).max(0.0);
        x.dplus[l] = new;
        ws.dpbar[l] = 2.0 * new - old;
        track::<TRACK>(&mut dx, new - old);

        let old = x.dminus[l];
        let new = (old - pre.tau_dminus[l] * (p.big_m * x.theta[l] - 1.0)).max(0.0);
        x.dminus[l] = new;
        ws.dmbar[l] = 2.0 * new - old;
        track::<TRACK>(&mut dx, new - old);
    }

    // Dual step y <- y + sigma (A xbar - b), inequality multipliers projected.
    for l in 0..k {
        let step = ws.w_alpha[l] - p.ratios[l] * ws.s_f[l] - p.m * ws.dpbar[l] + p.big_m * ws.dmbar[l];
        let new = (x.theta[l] + pre.sigma_theta[l] * step).max(0.0);
        track::<TRACK>(&mut dy, new - x.theta[l]);
        x.theta[l] = new;

        let new = (x.nu[l] + pre.sigma_nu[l] * (p.m - ws.s_f[l])).max(0.0);
        track::<TRACK>(&mut dy, new - x.nu[l]);
        x.nu[l] = new;
    }
    ws.edge_grad.fill(0.0);
    let sigma = pre.sigma_edge;
    let rows = x.eta.chunks_exact_mut(k).zip(x.xi.chunks_exact_mut(k)).zip(ws.abar.chunks_exact(k));
    for (ed, ((eta, xi), abar)) in edges.iter().zip(rows) {
        let (i, j) = (ed.i * k, ed.j * k);
        let fi = &ws.fbar[i..i + k];
        let fj = &ws.fbar[j..j + k];
        let (lo, hi) = ws.edge_grad.split_at_mut(j);
        let gi = &mut lo[i..i + k];
        let gj = &mut hi[..k];
        for l in 0..k {
            let diff = fi[l] - fj[l];
            let e_new = (eta[l] + sigma * (diff - abar[l])).max(0.0);
            let x_new = (xi[l] + sigma * (-diff - abar[l])).max(0.0);
            track::<TRACK>(&mut dy, e_new - eta[l]);
            track::<TRACK>(&mut dy, x_new - xi[l]);
            eta[l] = e_new;
            xi[l] = x_new;
            gi[l] += e_new - x_new;
            gj[l] -= e_new - x_new;
        }
    }
    (dx, dy)
}

/// `||z+ - z||_M` for the PDHG metric, computed from the constraint rows.
fn metric_step(p: &LpProblem<'_>, pre: &Preconditioners, explicit: bool, a: &LpState, b: &LpState) -> f64 {
    let (n, k) = (p.n(), p.k);
    let d = |u: &[f64], v: &[f64]| -> Vec<f64> { u.iter().zip(v).map(|(x, y)| y - x).collect() };
    let (df, dal, dp, dm) = (d(&a.f, &b.f), d(&a.alpha, &b.alpha), d(&a.dplus, &b.dplus), d(&a.dminus, &b.dminus));
    let (dth, dmu, dze, dnu, det, dxi) =
        (d(&a.theta, &b.theta), d(&a.mu, &b.mu), d(&a.zeta, &b.zeta), d(&a.nu, &b.nu), d(&a.eta, &b.eta), d(&a.xi, &b.xi));

    let mut primal = 0.0;
    for (idx, v) in df.iter().enumerate() {
        primal += v * v / pre.tau_f[idx];
    }
    for (idx, v) in dal.iter().enumerate() {
        primal += v * v / pre.tau_alpha[idx / k];
    }
    for l in 0..k {
        primal += dp[l] * dp[l] / pre.tau_dplus[l] + dm[l] * dm[l] / pre.tau_dminus[l];
    }

    let mut dual = 0.0;
    let mut coupling = 0.0;
    for l in 0..k {
        dual += dth[l] * dth[l] / pre.sigma_theta[l] + dnu[l] * dnu[l] / pre.sigma_nu[l];
        let s_f: f64 = (0..n).map(|i| p.subgradients[i * k + l] * df[i * k + l]).sum();
        let w_a: f64 = p.graph.edges().iter().enumerate().map(|(e, ed)| ed.w * dal[e * k + l]).sum();
        coupling += dth[l] * (w_a - p.ratios[l] * s_f - p.m * dp[l] + p.big_m * dm[l]);
        coupling += dnu[l] * -s_f;
    }
    for i in 0..n {
        dual += dmu[i] * dmu[i] / pre.sigma_mu;
        coupling += dmu[i] * df[i * k..(i + 1) * k].iter().sum::<f64>();
        if let (true, Some(l)) = (explicit, p.labels[i]) {
            dual += dze[i] * dze[i] / pre.sigma_zeta;
            coupling += dze[i] * df[i * k + l];
        }
    }
    for (e, ed) in p.graph.edges().iter().enumerate() {
        for l in 0..k {
            let idx = e * k + l;
            dual += (det[idx] * det[idx] + dxi[idx] * dxi[idx]) / pre.sigma_edge;
            let diff = df[ed.i * k + l] - df[ed.j * k + l];
            coupling += det[idx] * (diff - dal[idx]) + dxi[idx] * (-diff - dal[idx]);
        }
    }
    (primal + dual - 2.0 * coupling).max(0.0).sqrt()
}

/// Runs preconditioned PDHG from `start` until all residuals fall below
/// `settings.tol` or `settings.max_iter` is reached.
pub fn pdhg_solve(
    p: &LpProblem<'_>,
    pre: &Preconditioners,
    start: LpState,
    settings: &PdhgSettings,
) -> Result<LpSolution> {
    let (n, k) = (p.n(), p.k);
    let edges = p.graph.edges();
    let explicit = settings.labels == LabelHandling::Explicit;
    let fixed: Vec<bool> = p.labels.iter().map(|l| l.is_some() && !explicit).collect();
    let check_every = settings.check_every.max(1);

    let mut x = start;
    if x.f.len() != n * k || x.alpha.len() != edges.len() * k {
        return invalid("starting state does not match the problem dimensions");
    }
    // Labeled rows are constants when eliminated.
    for (i, l) in p.labels.iter().enumerate() {
        if let (Some(l), true) = (*l, fixed[i]) {
            x.f[i * k..(i + 1) * k].fill(0.0);
            x.f[i * k + l] = 1.0;
        }
    }

    let mut ws = Workspace {
        free: (0..n).filter(|&i| !fixed[i]).collect(),
        fbar: x.f.clone(),
        abar: x.alpha.clone(),
        dpbar: x.dplus.clone(),
        dmbar: x.dminus.clone(),
        edge_grad: vec![0.0; n * k],
        s_f_fixed: vec![0.0; k],
        s_f: vec![0.0; k],
        w_alpha: vec![0.0; k],
        coef: vec![0.0; k],
    };
    for (e, ed) in edges.iter().enumerate() {
        for l in 0..k {
            let z = x.eta[e * k + l] - x.xi[e * k + l];
            ws.edge_grad[ed.i * k + l] += z;
            ws.edge_grad[ed.j * k + l] -= z;
        }
    }
    for i in (0..n).filter(|&i| fixed[i]) {
        for l in 0..k {
            ws.s_f_fixed[l] += p.subgradients[i * k + l] * x.f[i * k + l];
        }
    }

    let mut history = Vec::new();
    let mut residuals = Residuals::default();
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..settings.max_iter {
        iterations = it + 1;
        let check = iterations % check_every == 0 || iterations == settings.max_iter;
        if !(check || settings.record_residuals) {
            pdhg_iteration::<false>(p, pre, explicit, &mut x, &mut ws);
            continue;
        }
        let before = settings.record_residuals.then(|| x.clone());
        let (dx, dy) = pdhg_iteration::<true>(p, pre, explicit, &mut x, &mut ws);
        if let Some(before) = before {
            let fixed_point = metric_step(p, pre, explicit, &before, &x);
            history.push(ResidualRecord { iteration: iterations, primal: dy, dual: dx, fixed_point });
        }
        if check {
            if !(dx.is_finite() && dy.is_finite()) || !x.all_finite() {
                return Err(Error::NumericFailure { iteration: iterations, what: "non-finite PDHG iterate".into() });
            }
            residuals = Residuals { primal: dy, dual: dx, violation: f64::INFINITY };
            if dx < settings.tol && dy < settings.tol {
                residuals.violation = scaled_violation(p, pre, &x);
                if residuals.violation < settings.tol {
                    converged = true;
                    break;
                }
            }
        }
    }

    if !x.all_finite() {
        return Err(Error::NumericFailure { iteration: iterations, what: "non-finite PDHG iterate".into() });
    }
    if !residuals.violation.is_finite() {
        residuals.violation = scaled_violation(p, pre, &x);
    }
    let violations = p.violations(&x);
    Ok(LpSolution { objective: x.objective(), state: x, iterations, converged, residuals, violations, history })
}
