//! Balanced k-cut clustering through a tight continuous relaxation.
//!
//! The relaxation minimizes `sum_l TV(F_l) / S(F_l)` over row-stochastic
//! embeddings `F`, where `TV` is the graph total variation and `S` the Lovász
//! extension of a balancing set function. A monotone descent scheme solves a
//! linear program in every step; growing sets of hard vertex labels steer the
//! iterates toward valid k-partitions.

pub mod balance;
pub mod descent;
pub mod embedding;
pub mod error;
pub mod graph;
pub mod inner_lp;
pub mod partitioner;
pub mod seed;

pub use balance::{BalanceFunction, BalanceKind};
pub use embedding::Embedding;
pub use error::{Error, Result};
pub use graph::{build_knn_graph, Edge, Graph, VertexSet};
