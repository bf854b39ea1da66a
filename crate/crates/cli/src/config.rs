use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Parser, ValueEnum};
use kcut::partitioner::SeedMode;
use kcut::BalanceKind;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    /// One point per row (CSV, TSV or whitespace separated).
    Points,
    /// Weighted edge list, one `i j w` triple per line.
    Edges,
}

/// Balanced k-cut clustering of point clouds and weighted graphs.
#[derive(Debug, Clone, Parser)]
#[command(name = "kcut", version)]
pub struct Args {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Points)]
    pub format: InputFormat,
    /// The last column of a points file holds the class label.
    #[arg(long)]
    pub has_labels: bool,
    /// Ground-truth labels, one per line (alternative to a label column).
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Number of clusters.
    #[arg(long)]
    pub k: usize,
    /// rcut, rcc-sym, rcc-asym, ncut, ncc-sym or ncc-asym.
    #[arg(long, default_value = "rcc-asym")]
    pub balance: BalanceKind,
    /// Neighbors per point in the similarity graph.
    #[arg(long, default_value_t = 15)]
    pub knn: usize,
    /// Kernel scale of the similarity graph.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Scale every feature to zero mean and unit variance first.
    #[arg(long)]
    pub standardize: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub n_random: usize,
    #[arg(long, default_value_t = 7)]
    pub n_spectral: usize,
    /// Reveal this many ground-truth labels per class.
    #[arg(long, conflicts_with = "label_percent")]
    pub labels_per_class: Option<usize>,
    /// Reveal this percentage of ground-truth labels per class.
    #[arg(long)]
    pub label_percent: Option<f64>,
    /// Diagnostic mode: drop membership and size constraints.
    #[arg(long)]
    pub simplex_only: bool,
    #[arg(long, default_value = "kcut-out")]
    pub out_dir: PathBuf,
    /// Convergence tolerance of the inner LP solver.
    #[arg(long, default_value_t = 1e-6)]
    pub inner_tol: f64,
    #[arg(long, default_value_t = 50_000)]
    pub inner_max_iter: usize,
    /// Relative decrease below which the outer descent stops.
    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,
    /// Also write inner solver residuals to residuals.csv.
    #[arg(long)]
    pub residuals: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub input: PathBuf,
    pub format: InputFormat,
    pub has_labels: bool,
    pub truth: Option<PathBuf>,
    pub k: usize,
    pub balance: BalanceKind,
    pub knn: usize,
    pub scale: f64,
    pub standardize: bool,
    pub seed: u64,
    pub n_random: usize,
    pub n_spectral: usize,
    pub seeding: Option<SeedMode>,
    pub simplex_only: bool,
    pub out_dir: PathBuf,
    pub inner_tol: f64,
    pub inner_max_iter: usize,
    pub eps: f64,
    pub residuals: bool,
}

impl ExperimentConfig {
    /// Defaults for everything except the input file and `k`.
    pub fn new(input: impl Into<PathBuf>, k: usize) -> Self {
        Args::parse_from(["kcut", "--input", "-", "--k", &k.to_string()]).into_config_unchecked(input.into())
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            bail!("--k must be at least 2");
        }
        if self.knn == 0 {
            bail!("--knn must be positive");
        }
        for (name, v) in [("--scale", self.scale), ("--inner-tol", self.inner_tol), ("--eps", self.eps)] {
            if !(v > 0.0 && v.is_finite()) {
                bail!("{name} must be positive, got {v}");
            }
        }
        if self.inner_max_iter == 0 {
            bail!("--inner-max-iter must be positive");
        }
        if self.n_random + self.n_spectral == 0 {
            bail!("at least one initialization is required");
        }
        if self.format == InputFormat::Edges && self.has_labels {
            bail!("--has-labels applies to points input only; use --truth for edge lists");
        }
        if self.has_labels && self.truth.is_some() {
            bail!("--has-labels and --truth are mutually exclusive");
        }
        match self.seeding {
            Some(SeedMode::PerClass(0)) => bail!("--labels-per-class must be positive"),
            Some(SeedMode::Percent(p)) if !(p > 0.0 && p <= 100.0) => bail!("--label-percent must lie in (0, 100]"),
            Some(_) if !self.has_labels && self.truth.is_none() => {
                bail!("label seeding needs ground truth (--has-labels or --truth)")
            }
            _ => {}
        }
        Ok(())
    }
}

impl Args {
    fn into_config_unchecked(self, input: PathBuf) -> ExperimentConfig {
        let seeding = match (self.labels_per_class, self.label_percent) {
            (Some(c), _) => Some(SeedMode::PerClass(c)),
            (None, Some(p)) => Some(SeedMode::Percent(p)),
            (None, None) => None,
        };
        ExperimentConfig {
            input,
            format: self.format,
            has_labels: self.has_labels,
            truth: self.truth,
            k: self.k,
            balance: self.balance,
            knn: self.knn,
            scale: self.scale,
            standardize: self.standardize,
            seed: self.seed,
            n_random: self.n_random,
            n_spectral: self.n_spectral,
            seeding,
            simplex_only: self.simplex_only,
            out_dir: self.out_dir,
            inner_tol: self.inner_tol,
            inner_max_iter: self.inner_max_iter,
            eps: self.eps,
            residuals: self.residuals,
        }
    }

    pub fn into_config(self) -> Result<ExperimentConfig> {
        let input = self.input.clone();
        let config = self.into_config_unchecked(input);
        config.validate()?;
        Ok(config)
    }
}
