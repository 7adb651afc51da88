use thiserror::Error;

use crate::sir::SolveStats;

/// Errors raised by the solver library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument lies outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    /// A right-hand side, Jacobian or map evaluation produced a non-finite value.
    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("singular linear system at pivot column {0}")]
    Singular(usize),

    #[error("iteration diverged after {iterations} iterations")]
    Divergence { iterations: usize },

    #[error("no convergence within {} iterations (residual {:.3e})", .0.iterations, .0.final_residual)]
    NotConverged(SolveStats),

    /// Input that is well formed but degenerate for the requested measure.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
