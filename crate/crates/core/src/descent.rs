//! Monotone descent on the sum of ratios `sum_l TV(F_l) / S(F_l)`.
//!
//! Each outer step linearizes `S` at the current iterate, solves the inner
//! LP, and moves to its solution. A strictly negative LP optimum certifies a
//! strictly smaller sum of ratios; an optimum of zero means no descent is
//! possible and the loop terminates.

use log::debug;
use serde::Serialize;

use crate::balance::BalanceFunction;
use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::inner_lp::{self, LpState, PdhgSettings, ResidualRecord};

/// A column with `S(F_l) < m * DEGENERATE_FACTOR` makes the run degenerate.
pub const DEGENERATE_FACTOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentSettings {
    /// Relative decrease of the objective below which the loop stops.
    pub eps: f64,
    /// Inner optimum at or above `-descent_tol` counts as "no descent possible".
    pub descent_tol: f64,
    pub max_outer: usize,
    pub inner: PdhgSettings,
    /// Floor for the adaptive tightening of the inner tolerance.
    pub min_inner_tol: f64,
    /// The inner solver first runs this many iterations, doubling on every
    /// retry; a partial solution is taken as soon as it lowers the objective
    /// by a relative `eps`. Zero always solves to tolerance.
    pub first_chunk: usize,
}

impl Default for DescentSettings {
    fn default() -> Self {
        Self {
            eps: 1e-4,
            descent_tol: 1e-7,
            max_outer: 100,
            inner: PdhgSettings::default(),
            min_inner_tol: 1e-9,
            first_chunk: 500,
        }
    }
}

/// Fixed data of one relaxation: graph, balancing function and the bounds
/// `m <= S(F_l) <= M` used by the size and descent constraints.
#[derive(Debug, Clone, Copy)]
pub struct Relaxation<'a> {
    pub graph: &'a Graph,
    pub balance: &'a BalanceFunction,
    pub m: f64,
    pub big_m: f64,
}

impl<'a> Relaxation<'a> {
    pub fn new(graph: &'a Graph, balance: &'a BalanceFunction) -> Self {
        Self { graph, balance, m: balance.min_value(), big_m: balance.max_value() }
    }

    /// Ratios `TV(F_l) / S(F_l)`; `S(F_l) = 0` gives infinity (or NaN for 0/0).
    pub fn ratios(&self, f: &Embedding) -> Vec<f64> {
        (0..f.k())
            .map(|l| {
                let col = f.column(l);
                self.graph.total_variation_unchecked(&col) / self.balance.lovasz_unchecked(&col)
            })
            .collect()
    }

    pub fn objective(&self, f: &Embedding) -> f64 {
        self.ratios(f).iter().sum()
    }

    fn balance_values(&self, f: &Embedding) -> Vec<f64> {
        (0..f.k()).map(|l| self.balance.lovasz_unchecked(&f.column(l))).collect()
    }
}

#[derive(Debug, Clone)]
pub struct DescentState {
    pub embedding: Embedding,
    pub ratios: Vec<f64>,
    /// Continuous objective `sum_l ratios[l]`.
    pub gamma: f64,
    pub outer_iter: usize,
    pub lp_state: Option<LpState>,
    pub inner_tol: f64,
}

impl DescentState {
    /// Starting state; fails if some column violates the size constraint.
    pub fn new(relax: &Relaxation<'_>, embedding: Embedding, inner_tol: f64) -> Result<Self> {
        for (l, s) in relax.balance_values(&embedding).into_iter().enumerate() {
            if !(s >= relax.m * (1.0 - inner_lp::SIZE_FEASIBILITY_TOL)) {
                return Err(Error::InfeasibleIterate { column: l, value: s, min: relax.m });
            }
        }
        let ratios = relax.ratios(&embedding);
        let gamma = ratios.iter().sum();
        Ok(Self { embedding, ratios, gamma, outer_iter: 0, lp_state: None, inner_tol })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    pub outer: usize,
    pub gamma_before: f64,
    pub gamma_after: f64,
    pub ratios: Vec<f64>,
    pub inner_objective: f64,
    /// Dual lower bound on the inner optimum, set when it certified termination.
    pub inner_bound: Option<f64>,
    pub inner_iterations: usize,
    pub inner_converged: bool,
    pub inner_tol: f64,
    #[serde(skip)]
    pub residuals: Vec<ResidualRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub enum StepOutcome {
    /// Moved to a new iterate with a smaller objective.
    Accepted(StepRecord),
    /// The inner optimum is `>= -descent_tol`: no descent possible.
    Terminated(StepRecord),
    /// The inner optimum promised descent but the repaired iterate did not
    /// deliver it even at the tightest inner tolerance.
    Stalled(StepRecord),
    /// Some `S(F_l)` collapsed toward zero.
    Degenerate(StepRecord),
}

impl StepOutcome {
    pub fn record(&self) -> &StepRecord {
        match self {
            StepOutcome::Accepted(r) | StepOutcome::Terminated(r) | StepOutcome::Stalled(r) | StepOutcome::Degenerate(r) => r,
        }
    }
}

/// Rows back on the simplex, labels exact, and size constraints restored by
/// blending toward the previous iterate (which satisfies them).
fn repair(
    relax: &Relaxation<'_>,
    problem: &inner_lp::LpProblem<'_>,
    candidate: &mut Embedding,
    labels: &[Option<usize>],
) {
    for (i, l) in labels.iter().enumerate() {
        if let Some(l) = *l {
            candidate.set_label(i, l);
        }
    }
    candidate.normalize_rows();

    let reference = problem.reference();
    let mut t: f64 = 0.0;
    for l in 0..candidate.k() {
        let s = problem.subgradient_column(l);
        let lin = |e: &Embedding| -> f64 { s.iter().enumerate().map(|(i, si)| si * e.get(i, l)).sum() };
        let (new, old) = (lin(candidate), lin(reference));
        if new < relax.m && old > new {
            t = t.max(((relax.m - new) / (old - new)).min(1.0));
        }
    }
    if t > 0.0 {
        *candidate = candidate.blend(reference, t);
    }
}

/// One outer iteration. On acceptance `state` moves to the new iterate.
pub fn outer_step(
    relax: &Relaxation<'_>,
    state: &mut DescentState,
    labels: &[Option<usize>],
    settings: &DescentSettings,
) -> Result<StepOutcome> {
    let problem = inner_lp::assemble(relax.graph, relax.balance, &state.embedding, labels, relax.m, relax.big_m)?;
    let pre = inner_lp::compute_preconditioners(&problem, settings.inner.labels);
    let mut inner = settings.inner;
    inner.tol = state.inner_tol;

    let mut start = match &state.lp_state {
        Some(prev) => LpState::warm(&problem, prev),
        None => LpState::cold(&problem),
    };
    let mut total_iterations = 0;
    let mut used = 0;
    let mut chunk = settings.first_chunk.max(1);
    let mut residuals = Vec::new();
    loop {
        let partial = settings.first_chunk > 0 && used + chunk < inner.max_iter;
        let mut run = inner;
        if partial {
            run.max_iter = chunk;
        } else {
            run.max_iter = inner.max_iter - used;
        }
        let sol = inner_lp::pdhg_solve(&problem, &pre, start, &run)?;
        total_iterations += sol.iterations;
        used += sol.iterations;
        residuals.extend(sol.history.iter().copied());

        if partial && !sol.converged {
            if sol.objective < -settings.descent_tol {
                let mut candidate = sol.embedding(&problem);
                repair(relax, &problem, &mut candidate, labels);
                let ratios = relax.ratios(&candidate);
                let gamma: f64 = ratios.iter().sum();
                let floor = relax.m * DEGENERATE_FACTOR;
                if gamma < state.gamma * (1.0 - settings.eps) && relax.balance_values(&candidate).iter().all(|&s| s >= floor) {
                    debug!(
                        "outer {}: gamma {:.6e} -> {:.6e} after {} inner iterations (inexact)",
                        state.outer_iter, state.gamma, gamma, total_iterations
                    );
                    let record = StepRecord {
                        outer: state.outer_iter,
                        gamma_before: state.gamma,
                        gamma_after: gamma,
                        ratios: ratios.clone(),
                        inner_objective: sol.objective,
                        inner_bound: None,
                        inner_iterations: total_iterations,
                        inner_converged: false,
                        inner_tol: inner.tol,
                        residuals,
                    };
                    state.embedding = candidate;
                    state.ratios = ratios;
                    state.gamma = gamma;
                    state.outer_iter += 1;
                    state.lp_state = Some(sol.state);
                    return Ok(StepOutcome::Accepted(record));
                }
            }
            let bound = problem.dual_bound(&sol.state);
            if bound >= -settings.descent_tol {
                return Ok(certified(state, sol, bound, total_iterations, inner.tol, residuals));
            }
            start = sol.state;
            chunk *= 2;
            continue;
        }
        let bound = problem.dual_bound(&sol.state);
        if bound >= -settings.descent_tol {
            return Ok(certified(state, sol, bound, total_iterations, inner.tol, residuals));
        }
        let can_tighten = inner.tol / 10.0 >= settings.min_inner_tol;

        let mut record = StepRecord {
            outer: state.outer_iter,
            gamma_before: state.gamma,
            gamma_after: state.gamma,
            ratios: state.ratios.clone(),
            inner_objective: sol.objective,
            inner_bound: None,
            inner_iterations: total_iterations,
            inner_converged: sol.converged,
            inner_tol: inner.tol,
            residuals: Vec::new(),
        };

        if sol.objective.abs() < 10.0 * inner.tol && can_tighten {
            inner.tol /= 10.0;
            state.inner_tol = inner.tol;
            start = sol.state;
            used = 0;
            continue;
        }
        if sol.objective >= -settings.descent_tol {
            state.lp_state = Some(sol.state);
            record.residuals = residuals;
            debug!(
                "outer {}: terminated, gamma {:.6e}, inner objective {:.3e}, {} inner iterations",
                state.outer_iter, state.gamma, sol.objective, total_iterations
            );
            return Ok(StepOutcome::Terminated(record));
        }

        let mut candidate = sol.embedding(&problem);
        repair(relax, &problem, &mut candidate, labels);
        let s_values = relax.balance_values(&candidate);
        let ratios = relax.ratios(&candidate);
        let gamma: f64 = ratios.iter().sum();
        record.gamma_after = gamma;
        record.ratios = ratios.clone();
        record.residuals = residuals.clone();

        if s_values.iter().any(|&s| s < relax.m * DEGENERATE_FACTOR) {
            return Ok(StepOutcome::Degenerate(record));
        }
        if gamma < state.gamma {
            debug!(
                "outer {}: gamma {:.6e} -> {:.6e}, lambda {:?}, inner objective {:.3e}, {} inner iterations",
                state.outer_iter, state.gamma, gamma, ratios, sol.objective, total_iterations
            );
            state.embedding = candidate;
            state.ratios = ratios;
            state.gamma = gamma;
            state.outer_iter += 1;
            state.lp_state = Some(sol.state);
            return Ok(StepOutcome::Accepted(record));
        }
        if can_tighten {
            inner.tol /= 10.0;
            state.inner_tol = inner.tol;
            start = sol.state;
            used = 0;
            continue;
        }
        state.lp_state = Some(sol.state);
        record.gamma_after = state.gamma;
        return Ok(StepOutcome::Stalled(record));
    }
}

/// Termination backed by a dual bound at or above `-descent_tol`.
fn certified(
    state: &mut DescentState,
    sol: inner_lp::LpSolution,
    bound: f64,
    inner_iterations: usize,
    inner_tol: f64,
    residuals: Vec<ResidualRecord>,
) -> StepOutcome {
    debug!(
        "outer {}: terminated by dual bound, gamma {:.6e}, {} inner iterations",
        state.outer_iter, state.gamma, inner_iterations
    );
    let record = StepRecord {
        outer: state.outer_iter,
        gamma_before: state.gamma,
        gamma_after: state.gamma,
        ratios: state.ratios.clone(),
        inner_objective: sol.objective,
        inner_bound: Some(bound),
        inner_iterations,
        inner_converged: sol.converged,
        inner_tol,
        residuals,
    };
    state.lp_state = Some(sol.state);
    StepOutcome::Terminated(record)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The inner LP certified that no descent is possible.
    Stationary,
    /// Relative decrease fell below `eps`.
    SmallDecrease,
    MaxIterations,
    Stalled,
    Degenerate,
}

#[derive(Debug, Clone, Serialize)]
pub struct DescentRun {
    pub steps: Vec<StepRecord>,
    pub termination: Termination,
}

impl DescentRun {
    /// Objective values: the start followed by every accepted step.
    pub fn gammas(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        if let Some(first) = self.steps.first() {
            out.push(first.gamma_before);
        }
        let accepted = self.steps.iter().filter(|s| s.gamma_after != s.gamma_before);
        out.extend(accepted.map(|s| s.gamma_after));
        out
    }
}

/// Iterates [`outer_step`] until termination, a relative decrease below
/// `settings.eps`, or `settings.max_outer` steps. `observe` sees every
/// accepted iterate.
pub fn descent_loop(
    relax: &Relaxation<'_>,
    state: &mut DescentState,
    labels: &[Option<usize>],
    settings: &DescentSettings,
    mut observe: impl FnMut(&DescentState),
) -> Result<DescentRun> {
    let mut steps = Vec::new();
    for _ in 0..settings.max_outer {
        let before = state.gamma;
        let outcome = outer_step(relax, state, labels, settings)?;
        let termination = match &outcome {
            StepOutcome::Accepted(_) => None,
            StepOutcome::Terminated(_) => Some(Termination::Stationary),
            StepOutcome::Stalled(_) => Some(Termination::Stalled),
            StepOutcome::Degenerate(_) => Some(Termination::Degenerate),
        };
        steps.push(match outcome {
            StepOutcome::Accepted(r) | StepOutcome::Terminated(r) | StepOutcome::Stalled(r) | StepOutcome::Degenerate(r) => r,
        });
        if let Some(termination) = termination {
            return Ok(DescentRun { steps, termination });
        }
        observe(state);
        if before - state.gamma <= settings.eps * before.abs() {
            return Ok(DescentRun { steps, termination: Termination::SmallDecrease });
        }
    }
    Ok(DescentRun { steps, termination: Termination::MaxIterations })
}
