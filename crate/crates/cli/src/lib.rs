//! Data loading, evaluation and reporting around the `kcut` solver.

pub mod config;
pub mod io;
pub mod metrics;
pub mod run;

pub use config::{Args, ExperimentConfig, InputFormat};
pub use metrics::clustering_error;
pub use run::{run, Report};
