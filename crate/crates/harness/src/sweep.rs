//! Parallel sweeps. Every run derives its seed from its own coordinates, so
//! the rows do not depend on the number of workers or on scheduling.

use lowmem_core::{make_instance, simulate, ParamSet, SimConfig, SimResult, Stop};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::seed::{run_seed, splitmix64};
use crate::{HarnessError, Result};

/// One run. Optional numbers are empty in the CSV when censored or failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub protocol: String,
    pub preset: String,
    pub n: u64,
    pub p: f64,
    pub epsilon: f64,
    pub rep: u32,
    pub seed: u64,
    /// `ok` or `failed`.
    pub status: String,
    pub error: String,
    pub success: bool,
    pub stop: String,
    pub communications_total: Option<u64>,
    pub n_consensus: Option<u64>,
    pub n_terminal: Option<u64>,
    pub consensus_time: Option<f64>,
    pub terminal_time: Option<f64>,
    pub consensus_censored: bool,
    pub terminal_censored: bool,
    pub final_incorrect: Option<u64>,
    pub final_terminal: Option<u64>,
    pub states_used: Option<u64>,
    pub universe_size: u64,
    pub events: Option<u64>,
    pub end_time: Option<f64>,
    /// `type:count` pairs separated by `;`, communications by initiator type.
    pub per_type_costs: String,
    /// `type:count` pairs, how often nodes switched into each type.
    pub type_entries: String,
}

fn pairs(names: &[String], values: &[u64]) -> String {
    names
        .iter()
        .zip(values)
        .map(|(k, v)| format!("{k}:{v}"))
        .collect::<Vec<_>>()
        .join(";")
}

impl Row {
    fn blank(cfg: &ExperimentConfig, ps: Option<&ParamSet>, n: u64, p: f64, rep: u32, seed: u64) -> Row {
        Row {
            protocol: cfg.protocol.to_string(),
            preset: cfg.preset_label(),
            n,
            p,
            epsilon: cfg.epsilon,
            rep,
            seed,
            status: "failed".into(),
            error: String::new(),
            success: false,
            stop: String::new(),
            communications_total: None,
            n_consensus: None,
            n_terminal: None,
            consensus_time: None,
            terminal_time: None,
            consensus_censored: true,
            terminal_censored: true,
            final_incorrect: None,
            final_terminal: None,
            states_used: None,
            universe_size: ps.map_or(0, |ps| ps.state_count),
            events: None,
            end_time: None,
            per_type_costs: String::new(),
            type_entries: String::new(),
        }
    }

    fn fill(&mut self, r: &SimResult) {
        self.status = "ok".into();
        self.success = r.success();
        self.stop = match r.stop {
            Stop::AllTerminal => "all-terminal",
            Stop::Frozen => "frozen",
            Stop::Horizon => "horizon",
        }
        .into();
        self.communications_total = Some(r.communications_total);
        self.n_consensus = r.communications_at_consensus;
        self.n_terminal = r.communications_at_terminal;
        self.consensus_time = r.consensus_time;
        self.terminal_time = r.terminal_time;
        self.consensus_censored = r.consensus_time.is_none();
        self.terminal_censored = r.terminal_time.is_none();
        self.final_incorrect = Some(r.final_incorrect_count as u64);
        self.final_terminal = Some(r.final_terminal_count as u64);
        self.states_used = r.states_used().map(|s| s as u64);
        self.events = Some(r.events_processed);
        self.end_time = Some(r.end_time);
        self.per_type_costs = pairs(&r.kind_names, &r.per_type_comm_counts);
        self.type_entries = pairs(&r.kind_names, &r.kind_entries);
    }

    /// Number of entries into the named node type, if recorded.
    pub fn entries_of(&self, kind: &str) -> Option<u64> {
        self.type_entries
            .split(';')
            .filter_map(|kv| kv.split_once(':'))
            .find(|(k, _)| *k == kind)
            .and_then(|(_, v)| v.parse().ok())
    }
}

/// Runs repetition `rep` of cell `(n, p)`. Hard errors become a failed row.
pub fn run_one(cfg: &ExperimentConfig, n: u64, p: f64, rep: u32) -> (Row, Option<SimResult>) {
    let seed = run_seed(cfg.seed_base, cfg.protocol, n, p, rep);
    let ps = cfg.params(n);
    let mut row = Row::blank(cfg, ps.as_ref().ok(), n, p, rep, seed);
    let outcome = ps.and_then(|ps| {
        let inst = make_instance(n as usize, p, seed)?;
        let mut sim = SimConfig::new(splitmix64(seed), Some(cfg.horizon.unwrap_or_else(|| ps.suggested_horizon())));
        sim.track_states = cfg.audit;
        Ok(simulate(&ps, &inst, &sim)?)
    });
    match outcome {
        Ok(r) => {
            row.fill(&r);
            (row, Some(r))
        }
        Err(e) => {
            row.error = e.to_string();
            (row, None)
        }
    }
}

/// Every run of the grid on `workers` threads (all cores when `None`), in
/// canonical order: ascending `n`, then `p`, then repetition.
pub fn run_sweep(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<Vec<Row>> {
    cfg.validate()?;
    let mut cells: Vec<(u64, f64, u32)> = Vec::new();
    for &n in &cfg.n_list {
        for &p in &cfg.p_list {
            cells.extend((0..cfg.repetitions).map(|rep| (n, p, rep)));
        }
    }
    cells.sort_by(|a, b| (a.0, a.1, a.2).partial_cmp(&(b.0, b.1, b.2)).unwrap());
    cells.dedup();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder.build().map_err(|e| HarnessError::Pool(e.to_string()))?;
    let rows = pool.install(|| {
        cells
            .par_iter()
            .map(|&(n, p, rep)| run_one(cfg, n, p, rep).0)
            .collect::<Vec<Row>>()
    });
    Ok(rows)
}

/// Aggregate of one `(n, p)` cell. Failed and censored runs count as
/// unsuccessful; means are over runs that reported the metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub n: u64,
    pub p: f64,
    pub runs: usize,
    pub failed: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_cost_per_n: Option<f64>,
    pub mean_terminal_time: Option<f64>,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, c) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    (c > 0).then(|| s / c as f64)
}

pub fn summarize(rows: &[Row]) -> Vec<CellSummary> {
    let mut keys: Vec<(u64, f64)> = rows.iter().map(|r| (r.n, r.p)).collect();
    keys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    keys.dedup();
    keys.into_iter()
        .map(|(n, p)| {
            let cell: Vec<&Row> = rows.iter().filter(|r| r.n == n && r.p == p).collect();
            let successes = cell.iter().filter(|r| r.success).count();
            CellSummary {
                n,
                p,
                runs: cell.len(),
                failed: cell.iter().filter(|r| r.status != "ok").count(),
                successes,
                success_rate: successes as f64 / cell.len() as f64,
                mean_cost_per_n: mean(cell.iter().filter_map(|r| r.communications_total).map(|c| c as f64 / n as f64)),
                mean_terminal_time: mean(cell.iter().filter_map(|r| r.terminal_time)),
            }
        })
        .collect()
}
