//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by parsing, network construction, and reasoning.
#[derive(Debug, Error)]
pub enum Error {
    /// Binary operation over relations of two different calculi.
    #[error("calculus mismatch: `{left}` vs `{right}`")]
    CalculusMismatch { left: String, right: String },

    /// Malformed input file; positions are 1-based.
    #[error("{path}:{line}:{col}: {message}")]
    Parse {
        path: String,
        line: usize,
        col: usize,
        message: String,
    },

    /// A calculus name that is neither built in nor resolvable to a file.
    #[error("unknown calculus `{0}`")]
    UnknownCalculus(String),

    /// Structurally broken calculus definition (sizes, indices, duplicates).
    #[error("invalid calculus: {0}")]
    InvalidCalculus(String),

    #[error("network needs at least one variable")]
    NoVariables,

    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    /// Attempt to write a non-identity constraint on a diagonal entry.
    #[error("diagonal constraint must be exactly the identity relation")]
    DiagonalNotIdentity,

    /// The network admits no scenario at all.
    #[error("networks have different variables")]
    VariableMismatch,

    #[error("network has no scenario")]
    NoScenario,

    /// An operation required an atomic refinement.
    #[error("refinement is not atomic on edge ({i}, {j})")]
    NotAtomic { i: String, j: String },

    /// Evidence and background knowledge rule each other out on an edge.
    #[error("contradiction between evidence and background on edge ({i}, {j})")]
    Contradiction { i: String, j: String },

    /// Probability annotations violating the distribution invariants.
    #[error("invalid probability data: {0}")]
    InvalidDistribution(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
