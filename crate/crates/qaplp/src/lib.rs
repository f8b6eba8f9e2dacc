//! Laboratory for a network-flow linear programming relaxation of the
//! quadratic assignment problem (QAP).
//!
//! The crate builds the lifted arc/arc-pair/arc-triple formulation over the
//! multipartite stage graph, solves it with a built-in sparse two-phase
//! revised simplex engine, decomposes fractional solutions into weighted
//! perfect matchings, and audits the integrality of LP optima against an
//! exact brute-force oracle.

pub mod analysis;
pub mod cli;
pub mod indexer;
pub mod instance;
pub mod model;
pub mod mps;
pub mod rng;
pub mod simplex;

pub use analysis::{ClaimAudit, Classification, DecompositionReport};
pub use indexer::{Arc, VariableSpace};
pub use instance::{CostMode, Matching, QapInstance};
pub use model::{BuildOptions, EmbeddedSolution, SparseModel};
pub use simplex::{LpSolution, SolveOptions, SolveStatus};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid matching: {0}")]
    InvalidMatching(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("enumeration limit exceeded: n={n} > limit={limit}")]
    EnumerationLimit { n: usize, limit: usize },
    #[error("model too large: {0}")]
    ModelTooLarge(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
