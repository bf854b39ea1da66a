use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use kcut::descent::DescentSettings;
use kcut::inner_lp::PdhgSettings;
use kcut::partitioner::{balanced_cut, solve, transductive_seed, InitRun, Partition, SolveConfig};
use kcut::{build_knn_graph, BalanceFunction, BalanceKind, Graph};
use log::warn;
use serde::Serialize;

use crate::config::{ExperimentConfig, InputFormat};
use crate::io;
use crate::metrics::clustering_error;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub n: usize,
    pub num_edges: usize,
    pub components: usize,
    pub warnings: Vec<String>,
    pub classes: Option<Vec<String>>,
    /// Vertices whose label was revealed, with the revealed cluster.
    pub seeded: Vec<(usize, usize)>,
    pub best_init: Option<usize>,
    pub best_continuous: Option<usize>,
    pub bcut: Option<f64>,
    pub bcut_by_kind: BTreeMap<String, Option<f64>>,
    pub cluster_sizes: Vec<usize>,
    pub clustering_error: Option<f64>,
    pub runtime_seconds: f64,
    pub runs: Vec<InitRun>,
    #[serde(skip)]
    pub assignment: Vec<usize>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn residual_csv(runs: &[InitRun]) -> String {
    let mut out = String::from("init,phase,outer,iteration,primal,dual,fixed_point\n");
    for run in runs {
        for phase in &run.phases {
            for step in &phase.steps {
                for r in &step.residuals {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{:e},{:e},{:e}",
                        run.index, phase.phase, step.outer, r.iteration, r.primal, r.dual, r.fixed_point
                    );
                }
            }
        }
    }
    out
}

/// Loads the input, solves, and writes `assignment.tsv`, `report.json` and
/// (if requested) `residuals.csv` into the output directory.
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let start = Instant::now();
    let mut warnings = Vec::new();

    let (graph, raw_labels): (Graph, Option<Vec<String>>) = match config.format {
        InputFormat::Points => {
            let mut data = io::read_points(&config.input, config.has_labels)?;
            if config.standardize {
                io::standardize(&mut data.points);
            }
            (build_knn_graph(&data.points, config.knn, config.scale)?, data.labels)
        }
        InputFormat::Edges => (io::read_edges(&config.input)?, None),
    };
    let raw_labels = match &config.truth {
        Some(path) => Some(io::read_truth(path)?),
        None => raw_labels,
    };
    let truth = match raw_labels {
        Some(raw) if raw.len() != graph.n() => bail!("{} labels for {} vertices", raw.len(), graph.n()),
        Some(raw) => Some(io::encode_labels(&raw)),
        None => None,
    };

    let components = graph.connected_components().len();
    if components > 1 {
        warnings.push(format!("graph is disconnected ({components} connected components)"));
    }
    if components > config.k {
        warnings.push(format!(
            "graph has {components} connected components, more than k = {}; the relaxation may have degenerate optima",
            config.k
        ));
    }
    for w in &warnings {
        warn!("{w}");
    }

    let balance = BalanceFunction::new(config.balance, config.k, &graph)?;
    let seeds = match (&config.seeding, &truth) {
        (Some(mode), Some((codes, classes))) => {
            if classes.len() > config.k {
                bail!("{} classes in the ground truth but k = {}", classes.len(), config.k);
            }
            Some(transductive_seed(codes, config.k, *mode, config.seed)?)
        }
        _ => None,
    };

    let solve_config = SolveConfig {
        n_random: config.n_random,
        n_spectral: config.n_spectral,
        seed: config.seed,
        descent: DescentSettings {
            eps: config.eps,
            inner: PdhgSettings {
                tol: config.inner_tol,
                max_iter: config.inner_max_iter,
                record_residuals: config.residuals,
                ..Default::default()
            },
            ..Default::default()
        },
        simplex_only: config.simplex_only,
        ..Default::default()
    };
    let solved = solve(&graph, &balance, &solve_config, seeds.as_ref())?;

    let partition: Partition = if config.simplex_only {
        let index = solved.best_continuous.context("no initialization finished")?;
        solved.runs[index].final_partition.clone().context("no final partition")?
    } else {
        solved.best_partition().cloned().context("no valid partition")?
    };
    let assignment = partition.assignment().to_vec();

    let bcut_by_kind = BalanceKind::ALL
        .into_iter()
        .map(|kind| {
            let value = BalanceFunction::new(kind, config.k, &graph)
                .ok()
                .and_then(|bf| finite(balanced_cut(&graph, &bf, &partition)));
            (kind.name().to_string(), value)
        })
        .collect();
    let clustering_error = match &truth {
        Some((codes, _)) => Some(clustering_error(&assignment, codes)?),
        None => None,
    };
    let seeded: Vec<(usize, usize)> = seeds
        .as_ref()
        .map(|s| s.labels().iter().enumerate().filter_map(|(i, l)| l.map(|l| (i, l))).collect())
        .unwrap_or_default();

    let report = Report {
        config: config.clone(),
        n: graph.n(),
        num_edges: graph.num_edges(),
        components,
        warnings,
        classes: truth.map(|t| t.1),
        seeded,
        best_init: solved.best.as_ref().map(|b| b.init_index),
        best_continuous: solved.best_continuous,
        bcut: finite(balanced_cut(&graph, &balance, &partition)),
        bcut_by_kind,
        cluster_sizes: partition.cluster_sizes(),
        clustering_error,
        runtime_seconds: start.elapsed().as_secs_f64(),
        runs: solved.runs,
        assignment,
    };

    let dir = &config.out_dir;
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    fs::write(dir.join("assignment.tsv"), io::format_assignment(&report.assignment))?;
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)?)?;
    if config.residuals {
        fs::write(dir.join("residuals.csv"), residual_csv(&report.runs))?;
    }
    Ok(report)
}
