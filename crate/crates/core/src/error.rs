//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by simulation, reconstruction, and configuration code.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration or file content (maps to CLI exit code 2).
    #[error("configuration error: {0}")]
    Config(String),
    /// Invalid argument to an operation (maps to CLI exit code 2).
    #[error("invalid argument: {0}")]
    Invalid(String),
    /// A protocol-level inconsistency, e.g. a rank-deficient tomography
    /// design matrix (maps to CLI exit code 3).
    #[error("protocol error: {0}")]
    Protocol(String),
    /// Numerical failure: non-unitary propagator, invalid probabilities,
    /// failed factorization, or I/O failure on outputs (CLI exit code 3).
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// An iterative reconstruction hit its iteration cap without meeting
    /// the convergence tolerance (maps to CLI exit code 4).
    #[error("non-convergence: {0}")]
    NonConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
