//! Batch driver for the hypstab toolkit: classification, Lopatinski scans,
//! shock stability, structural checks and estimate probes as reproducible jobs.

pub mod config;
pub mod jobs;
pub mod output;
pub mod registry;

pub use config::{parse_sweep_values, CommandKind, JobConfig, ModelParams, PointSpec, SweepSpec};
pub use output::{emit_plot_data, scan_csv};
pub use registry::{resolve, Model, MODEL_NAMES};

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] hypstab::Error),
}

/// Process exit status: 0 success, 1 analysis-negative finding, 2 error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success = 0,
    Negative = 1,
    Failure = 2,
}

impl Status {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    /// Human-readable table for stdout.
    pub summary: String,
    pub artifacts: Vec<PathBuf>,
}

/// Run `cfg.command` (or `command` when given) with the configured thread count.
pub fn run(cfg: &JobConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let command = cfg.command.ok_or_else(|| CliError::Usage("no command given".into()))?;
    let threads = cfg.threads.or_else(|| std::env::var("HYPSTAB_THREADS").ok().and_then(|v| v.trim().parse().ok()));
    let work = || jobs::dispatch(command, cfg);
    match threads {
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
            pool.install(work)
        }
        _ => work(),
    }
}

/// [`run`] with errors folded into a status-2 outcome.
pub fn run_to_outcome(cfg: &JobConfig) -> Outcome {
    match run(cfg) {
        Ok(o) => o,
        Err(e) => Outcome { status: Status::Failure, summary: format!("error: {e}\n"), artifacts: Vec::new() },
    }
}
