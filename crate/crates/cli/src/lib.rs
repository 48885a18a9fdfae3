//! Config-driven experiment runner: presets, TOML configs, CSV tables.

pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;
pub mod presets;

use std::path::PathBuf;
use std::time::Instant;

pub use config::{ExperimentConfig, Pipeline};
pub use error::{Result, RunError};
pub use output::{Cell, ResultTable};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "SCRAMBLE_WORKERS";

/// Files written by a run.
#[derive(Debug)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub tables: Vec<ResultTable>,
    pub workers: usize,
    pub wall_time_seconds: f64,
}

/// Worker count: explicit request, then the config, then the machine.
pub fn resolve_workers(requested: Option<usize>, config: &ExperimentConfig) -> usize {
    requested
        .or(config.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1)
}

/// Runs an experiment and writes its tables and metadata.
pub fn run(config: &ExperimentConfig, workers: usize) -> Result<RunSummary> {
    let start = Instant::now();
    let tables = pipeline::compute(config, workers)?;
    let wall_time_seconds = start.elapsed().as_secs_f64();
    let files = output::write_all(&config.output_dir, &tables, config, workers, wall_time_seconds)?;
    Ok(RunSummary {
        output_dir: config.output_dir.clone(),
        files,
        tables,
        workers,
        wall_time_seconds,
    })
}
