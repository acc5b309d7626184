//! Experiment plumbing behind the `vortexlab` binary: configuration, run
//! directories, reports and plots.

pub mod config;
pub mod plot;
mod radial;
mod run;

pub use config::{parse_grid, GridSpec, RunConfig, ScheduleEntry, ScheduleSpec, VortexSpec};
pub use radial::{radial_table, RadialRow, RadialTable};
pub use run::{
    classify_dir, execute, load_run, report_dir, Command, FileEntry, Manifest, RunOutcome,
    RunStatus, StepEntry,
};

use serde::Serialize;

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_CONVERGENCE: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

/// Environment variable capping the worker threads.
pub const THREADS_VAR: &str = "VORTEXLAB_THREADS";

/// Machine-readable failure printed on stderr.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabError {
    pub code: i32,
    pub stage: String,
    pub message: String,
}

impl LabError {
    pub fn new(code: i32, stage: &str, message: impl Into<String>) -> Self {
        Self {
            code,
            stage: stage.into(),
            message: message.into(),
        }
    }

    /// Classifies a library error raised during `stage`.
    pub fn from_error(stage: &str, e: &Error) -> Self {
        let code = match e {
            Error::NonConvergence { .. } | Error::Overflow(_) => EXIT_CONVERGENCE,
            _ => EXIT_CONFIG,
        };
        Self::new(code, stage, e.to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }
}

/// Sizes the global thread pool from [`THREADS_VAR`], if set.
pub fn init_threads() -> Result<Option<usize>, LabError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(None);
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        LabError::new(
            EXIT_CONFIG,
            "threads",
            format!("{THREADS_VAR} must be a positive integer, got {raw:?}"),
        )
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| LabError::new(EXIT_CONFIG, "threads", e.to_string()))?;
    Ok(Some(n))
}
