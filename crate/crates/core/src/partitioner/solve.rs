use log::{debug, info};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::balance::BalanceFunction;
use crate::descent::{descent_loop, DescentSettings, DescentState, Relaxation, StepRecord, Termination};
use crate::embedding::Embedding;
use crate::error::{invalid, Error, Result};
use crate::graph::Graph;
use crate::inner_lp::SIZE_FEASIBILITY_TOL;
use crate::seed::{self, Stream};

use super::init::{initializations, InitKind};
use super::membership::{grow_membership, LabelConstraintSet};
use super::ordering::vertex_ordering;
use super::rounding::{round, Partition};

const REPAIR_STEPS: [f64; 10] = [0.001, 0.01, 0.02, 0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    pub n_random: usize,
    pub n_spectral: usize,
    pub seed: u64,
    pub descent: DescentSettings,
    /// Diagnostic mode: only simplex constraints, no membership growth and a
    /// size bound of `simplex_only_floor * m` instead of `m`.
    pub simplex_only: bool,
    pub simplex_only_floor: f64,
    /// Relative gap `|BCut - gamma| / BCut` at which a phase whose iterate
    /// rounds to a valid partition ends the run.
    pub stop_tol: f64,
    pub max_phases: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            n_random: 5,
            n_spectral: 7,
            seed: 0,
            descent: DescentSettings::default(),
            simplex_only: false,
            simplex_only_floor: 1e-6,
            stop_tol: 1e-4,
            max_phases: 64,
        }
    }
}

/// One run of the descent loop with a fixed label set.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseRecord {
    pub phase: usize,
    pub quota: usize,
    pub capped: bool,
    /// Constrained vertices `I` during this phase, in increasing order.
    pub members: Vec<usize>,
    pub steps: Vec<StepRecord>,
    pub termination: Termination,
}

#[derive(Debug, Clone, Serialize)]
pub struct Improvement {
    pub phase: usize,
    pub outer: usize,
    pub bcut: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundingSummary {
    pub cluster_sizes: Vec<usize>,
    pub weak_degenerate: bool,
    pub strong_degenerate: bool,
    pub bcut: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InitRun {
    pub index: usize,
    pub kind: InitKind,
    pub start_gamma: f64,
    pub final_gamma: f64,
    pub best_bcut: Option<f64>,
    pub improvements: Vec<Improvement>,
    pub phases: Vec<PhaseRecord>,
    pub final_rounding: Option<RoundingSummary>,
    pub final_distance_to_indicator: f64,
    pub events: Vec<String>,
    pub failure: Option<String>,
    #[serde(skip)]
    pub best_partition: Option<Partition>,
    #[serde(skip)]
    pub final_partition: Option<Partition>,
    #[serde(skip)]
    pub final_embedding: Option<Embedding>,
}

impl InitRun {
    /// Objective after every accepted step, across all phases.
    pub fn gamma_trajectory(&self) -> Vec<f64> {
        let mut out = vec![self.start_gamma];
        for phase in &self.phases {
            if let Some(first) = phase.steps.first() {
                if out.last() != Some(&first.gamma_before) {
                    out.push(first.gamma_before);
                }
            }
            out.extend(phase.steps.iter().filter(|s| s.gamma_after != s.gamma_before).map(|s| s.gamma_after));
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BestPartition {
    pub init_index: usize,
    pub bcut: f64,
    pub partition: Partition,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub best: Option<BestPartition>,
    /// Run with the smallest final continuous objective.
    pub best_continuous: Option<usize>,
    pub runs: Vec<InitRun>,
}

impl SolveReport {
    pub fn best_partition(&self) -> Option<&Partition> {
        self.best.as_ref().map(|b| &b.partition)
    }
}

struct Tracker<'a> {
    graph: &'a Graph,
    balance: &'a BalanceFunction,
    tie: ChaCha8Rng,
    best: Option<(Partition, f64)>,
    /// Iterate whose rounding gave `best`.
    best_source: Option<Embedding>,
    rankings: Option<Vec<Vec<usize>>>,
    improvements: Vec<Improvement>,
    phase: usize,
}

impl Tracker<'_> {
    fn observe(&mut self, state: &DescentState) {
        let r = round(self.graph, self.balance, &state.embedding, &mut self.tie);
        if r.is_valid() && self.best.as_ref().map_or(true, |b| r.bcut < b.1) {
            debug!("phase {} outer {}: best BCut {:.6}", self.phase, state.outer_iter, r.bcut);
            self.improvements.push(Improvement { phase: self.phase, outer: state.outer_iter, bcut: r.bcut });
            self.best = Some((r.partition, r.bcut));
            self.best_source = Some(state.embedding.clone());
            self.rankings = None;
        }
    }

    fn rankings(&mut self, f: &Embedding) -> Vec<Vec<usize>> {
        if let Some((partition, _)) = &self.best {
            if self.rankings.is_none() {
                self.rankings = vertex_ordering(self.graph, self.balance, partition).ok();
            }
            if let Some(r) = &self.rankings {
                return r.clone();
            }
        }
        (0..f.k())
            .map(|l| {
                let mut order: Vec<usize> = (0..f.n()).collect();
                order.sort_by(|&a, &b| f.get(b, l).total_cmp(&f.get(a, l)).then(a.cmp(&b)));
                order
            })
            .collect()
    }
}

/// Restores `S(F_l) >= m` for all columns by blending toward a valid
/// partition that respects the labels. Returns whether `f` changed.
fn restore_size(relax: &Relaxation<'_>, f: &mut Embedding, lcs: &LabelConstraintSet) -> Result<bool> {
    let feasible = |e: &Embedding| {
        (0..e.k()).all(|l| relax.balance.lovasz_unchecked(&e.column(l)) >= relax.m * (1.0 - SIZE_FEASIBILITY_TOL))
    };
    if feasible(f) {
        return Ok(false);
    }
    let (n, k) = (f.n(), f.k());
    let mut assign: Vec<usize> = (0..n)
        .map(|i| lcs.label(i).unwrap_or_else(|| (0..k).fold(0, |b, l| if f.get(i, l) > f.get(i, b) { l } else { b })))
        .collect();
    let mut sizes = vec![0usize; k];
    assign.iter().for_each(|&c| sizes[c] += 1);
    for l in 0..k {
        if sizes[l] > 0 {
            continue;
        }
        let donor = (0..n)
            .filter(|&i| lcs.label(i).is_none() && sizes[assign[i]] > 1)
            .fold(None, |b: Option<usize>, i| match b {
                Some(j) if f.get(j, l) >= f.get(i, l) => Some(j),
                _ => Some(i),
            });
        let Some(i) = donor else {
            return invalid("labels leave no way to fill every cluster");
        };
        sizes[assign[i]] -= 1;
        assign[i] = l;
        sizes[l] += 1;
    }
    let target = Embedding::from_assignment(&assign, k)?;
    for t in REPAIR_STEPS {
        let candidate = f.blend(&target, t);
        if feasible(&candidate) {
            *f = candidate;
            return Ok(true);
        }
    }
    invalid("size constraints cannot be restored")
}

fn run_init(
    graph: &Graph,
    balance: &BalanceFunction,
    config: &SolveConfig,
    seeds: &LabelConstraintSet,
    index: usize,
    kind: InitKind,
    mut f: Embedding,
) -> InitRun {
    let mut relax = Relaxation::new(graph, balance);
    if config.simplex_only {
        relax.m *= config.simplex_only_floor;
    }
    let mut tracker = Tracker {
        graph,
        balance,
        tie: seed::rng(config.seed, Stream::TieBreak, index as u64),
        best: None,
        best_source: None,
        rankings: None,
        improvements: Vec::new(),
        phase: 0,
    };
    let mut run = InitRun {
        index,
        kind,
        start_gamma: f64::NAN,
        final_gamma: f64::NAN,
        best_bcut: None,
        improvements: Vec::new(),
        phases: Vec::new(),
        final_rounding: None,
        final_distance_to_indicator: f64::NAN,
        events: Vec::new(),
        failure: None,
        best_partition: None,
        final_partition: None,
        final_embedding: None,
    };

    let result = (|| -> Result<()> {
        let mut lcs = seeds.clone();
        lcs.apply(&mut f);
        if restore_size(&relax, &mut f, &lcs)? {
            run.events.push("initial embedding blended toward a partition to meet the size constraints".into());
        }
        let mut state = DescentState::new(&relax, f.clone(), config.descent.inner.tol)?;
        run.start_gamma = state.gamma;
        tracker.observe(&state);

        for phase in 0..config.max_phases {
            tracker.phase = phase;
            let labels = lcs.labels().to_vec();
            let descent = descent_loop(&relax, &mut state, &labels, &config.descent, |s| tracker.observe(s))?;
            let termination = descent.termination;
            run.phases.push(PhaseRecord {
                phase,
                quota: lcs.quota(),
                capped: lcs.capped(),
                members: lcs.members().iter().collect(),
                steps: descent.steps,
                termination,
            });
            match termination {
                Termination::Degenerate => {
                    run.events.push(format!("phase {phase}: a column of the embedding collapsed"));
                    break;
                }
                Termination::Stalled => run.events.push(format!("phase {phase}: descent stalled at the tightest inner tolerance")),
                Termination::MaxIterations => run.events.push(format!("phase {phase}: outer iteration limit reached")),
                _ => {}
            }
            if config.simplex_only || lcs.is_full() {
                break;
            }
            let r = round(graph, balance, &state.embedding, &mut tracker.tie);
            if r.is_valid() && (r.bcut - state.gamma).abs() <= config.stop_tol * r.bcut.max(1e-12) {
                break;
            }

            let rankings = tracker.rankings(&state.embedding);
            let mut source = tracker.best_source.clone().unwrap_or_else(|| state.embedding.clone());
            lcs = grow_membership(&lcs, &rankings, &mut source, &mut tracker.tie);
            let mut f = state.embedding.clone();
            lcs.apply(&mut f);
            if restore_size(&relax, &mut f, &lcs)? {
                run.events.push(format!("phase {}: embedding blended toward a partition after growth", phase + 1));
            }
            let previous = state.lp_state.take();
            state = DescentState::new(&relax, f, config.descent.inner.tol)?;
            state.lp_state = previous;
            tracker.observe(&state);
        }

        run.final_gamma = state.gamma;
        run.final_distance_to_indicator = state.embedding.distance_to_indicator();
        let r = round(graph, balance, &state.embedding, &mut tracker.tie);
        run.final_rounding = Some(RoundingSummary {
            cluster_sizes: r.partition.cluster_sizes(),
            weak_degenerate: r.weak_degenerate,
            strong_degenerate: r.strong_degenerate,
            bcut: r.is_valid().then_some(r.bcut),
        });
        if r.strong_degenerate {
            run.events.push("final embedding rounds to an invalid partition".into());
        }
        run.final_partition = Some(r.partition);
        run.final_embedding = Some(state.embedding);
        Ok(())
    })();

    if let Err(e) = result {
        run.failure = Some(e.to_string());
    }
    run.improvements = tracker.improvements;
    if let Some((p, b)) = tracker.best {
        run.best_bcut = Some(b);
        run.best_partition = Some(p);
    }
    info!(
        "init {index} ({kind:?}): gamma {:.6} -> {:.6}, best BCut {:?}, {} phases",
        run.start_gamma,
        run.final_gamma,
        run.best_bcut,
        run.phases.len()
    );
    run
}

/// Runs the full method from every initialization and returns the partition
/// with the smallest balanced cut (ties go to the earlier initialization).
///
/// `seeds` are permanent labels, e.g. from [`super::transductive_seed`].
/// Fails with [`Error::AllDegenerate`] if no run produced a valid partition,
/// except in simplex-only mode where invalid roundings are the expected
/// outcome and the report is returned regardless.
pub fn solve(
    graph: &Graph,
    balance: &BalanceFunction,
    config: &SolveConfig,
    seeds: Option<&LabelConstraintSet>,
) -> Result<SolveReport> {
    let (n, k) = (graph.n(), balance.k());
    if balance.n() != n {
        return invalid(format!("balancing function over {} vertices, graph has {n}", balance.n()));
    }
    if config.n_random + config.n_spectral == 0 {
        return invalid("at least one initialization is required");
    }
    let empty = LabelConstraintSet::new(n);
    let seeds = seeds.unwrap_or(&empty);
    if seeds.n() != n || seeds.labels().iter().flatten().any(|&l| l >= k) {
        return invalid("seed labels do not match the graph or k");
    }

    let inits = initializations(graph, k, config.n_random, config.n_spectral, config.seed);
    let runs: Vec<InitRun> = inits
        .into_par_iter()
        .enumerate()
        .map(|(index, init)| run_init(graph, balance, config, seeds, index, init.kind, init.embedding))
        .collect();

    let best = runs
        .iter()
        .filter_map(|r| Some((r.index, r.best_bcut?, r.best_partition.clone()?)))
        .fold(None, |acc: Option<(usize, f64, Partition)>, cand| match &acc {
            Some(b) if b.1 <= cand.1 => acc,
            _ => Some(cand),
        })
        .map(|(init_index, bcut, partition)| BestPartition { init_index, bcut, partition });
    let best_continuous = runs
        .iter()
        .filter(|r| r.final_gamma.is_finite())
        .fold(None, |acc: Option<&InitRun>, r| match acc {
            Some(b) if b.final_gamma <= r.final_gamma => Some(b),
            _ => Some(r),
        })
        .map(|r| r.index);

    if best.is_none() && !config.simplex_only {
        return Err(Error::AllDegenerate(runs.len()));
    }
    Ok(SolveReport { best, best_continuous, runs })
}
