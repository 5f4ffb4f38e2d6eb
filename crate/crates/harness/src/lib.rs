//! Experiment plumbing for the lowmem protocols: JSON configuration, parallel
//! parameter sweeps with per-run seeds, CSV output with a JSON sidecar, and
//! log-log scaling fits.

pub mod config;
pub mod fit;
pub mod output;
pub mod seed;
pub mod sweep;

pub use config::{ExperimentConfig, OutputPaths};
pub use fit::{fit_rows, fit_scaling, Fit, Metric};
pub use output::{write_csv, write_sidecar, Sidecar, CSV_COLUMNS, CSV_VERSION};
pub use seed::{run_seed, splitmix64};
pub use sweep::{run_one, run_sweep, summarize, CellSummary, Row};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("degenerate fit: {0}")]
    Fit(String),
    #[error(transparent)]
    Core(#[from] lowmem_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("worker pool: {0}")]
    Pool(String),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
