use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the field, shooting, solver and diagnostics layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ball radius {radius} is not below half the shortest period {limit}")]
    RadiusTooLarge { radius: f64, limit: f64 },

    #[error("exponential overflow: {0}")]
    Overflow(String),

    #[error("non-physical shot: {0}")]
    NonPhysical(String),

    #[error("target flux {0} lies outside the range (4, inf)")]
    FluxOutOfRange(f64),

    #[error("regression rejected: {0}")]
    Regression(String),

    #[error("identity does not apply: {0}")]
    NotApplicable(String),

    #[error("weak-coupling constraint violated: {0}")]
    Constraint(String),

    #[error(
        "Newton iteration did not converge after {iters} iterations (residual {residual:.3e})"
    )]
    NonConvergence { iters: usize, residual: f64 },

    #[error("too few steps in run: need {needed}, got {got}")]
    TooFewSteps { needed: usize, got: usize },

    #[error("corrupt dump {path}: {message}")]
    CorruptDump { path: PathBuf, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
