//! CSV rows and the JSON sidecar that makes a CSV reproducible.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::sweep::{summarize, CellSummary, Row};
use crate::Result;

/// Bumped whenever [`CSV_COLUMNS`] changes.
pub const CSV_VERSION: u32 = 1;

pub const CSV_COLUMNS: [&str; 26] = [
    "protocol",
    "preset",
    "n",
    "p",
    "epsilon",
    "rep",
    "seed",
    "status",
    "error",
    "success",
    "stop",
    "communications_total",
    "n_consensus",
    "n_terminal",
    "consensus_time",
    "terminal_time",
    "consensus_censored",
    "terminal_censored",
    "final_incorrect",
    "final_terminal",
    "states_used",
    "universe_size",
    "events",
    "end_time",
    "per_type_costs",
    "type_entries",
];

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Everything needed to regenerate a CSV, plus per-cell aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub csv_version: u32,
    pub tool_version: String,
    pub config: ExperimentConfig,
    pub resolved_overrides: lowmem_core::Overrides,
    pub rows: usize,
    pub cells: Vec<CellSummary>,
}

impl Sidecar {
    pub fn new(config: &ExperimentConfig, rows: &[Row]) -> Result<Sidecar> {
        Ok(Sidecar {
            csv_version: CSV_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            resolved_overrides: config.resolved_overrides()?,
            config: config.clone(),
            rows: rows.len(),
            cells: summarize(rows),
        })
    }
}

pub fn write_sidecar(config: &ExperimentConfig, rows: &[Row], path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(&Sidecar::new(config, rows)?)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}
