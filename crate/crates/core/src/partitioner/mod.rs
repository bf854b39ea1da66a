//! From continuous embeddings to k-partitions.
//!
//! Rounding, the b*-ordering used to pick membership constraints, label
//! growth, initializations and the multi-start solver.

mod degenerate;
mod init;
mod membership;
mod ordering;
mod rounding;
mod solve;

pub use degenerate::{construct_degenerate_embedding, degenerate_objective};
pub use init::{initializations, InitKind, Initialization, KMEANS_RESTARTS, SPECTRAL_INDICATOR_WEIGHT};
pub use membership::{grow_membership, transductive_seed, LabelConstraintSet, SeedMode};
pub use ordering::{vertex_ordering, vertex_scores};
pub use rounding::{balanced_cut, round, Partition, RoundedResult, TIE_TOL};
pub use solve::{
    solve, BestPartition, Improvement, InitRun, PhaseRecord, RoundingSummary, SolveConfig, SolveReport,
};
