//! Browser bindings for the demo page. Every entry point returns a JSON
//! string; the plain Rust functions behind them are usable natively too.

use lowmem_core::analyzer::{self, toys, Mode};
use lowmem_core::{analyze_params, derive_params, make_instance, simulate, ParamSet, Preset, ProtocolId, SimConfig};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest population the page may request.
pub const MAX_NODES: u32 = 1 << 16;
const ANALYZER_LIMIT: usize = 50_000;
const SERIES_POINTS: f64 = 200.0;

fn params(protocol: &str, n: u32, c0_scale: Option<f64>) -> Result<ParamSet, String> {
    if n > MAX_NODES {
        return Err(format!("n = {n} is above the demo limit of {MAX_NODES}"));
    }
    let id: ProtocolId = protocol.parse()?;
    let mut o = Preset::Desk.overrides(id);
    if let Some(c) = c0_scale {
        o.c0_scale = c;
    }
    derive_params(id, n.into(), 0.2, o).map_err(|e| e.to_string())
}

fn json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Series {
    kind_names: Vec<String>,
    times: Vec<f64>,
    /// One row per node type, aligned with `times`.
    counts: Vec<Vec<usize>>,
    success: bool,
    stop: String,
    end_time: f64,
    communications: u64,
    consensus_time: Option<f64>,
    terminal_time: Option<f64>,
    kind_entries: Vec<u64>,
}

/// One desk-preset run with node-type counts over time.
pub fn run_series(protocol: &str, n: u32, p: f64, seed: u32) -> Result<String, String> {
    let ps = params(protocol, n, None)?;
    let inst = make_instance(n as usize, p, seed.into()).map_err(|e| e.to_string())?;
    let mut cfg = SimConfig::new(u64::from(seed) ^ 0x5eed, Some(ps.suggested_horizon()));
    // Runs are deterministic, so a first pass finds the length and the second
    // samples it evenly.
    let probe = simulate(&ps, &inst, &cfg).map_err(|e| e.to_string())?;
    cfg.series_interval = Some((probe.end_time / SERIES_POINTS).max(1e-3));
    let r = simulate(&ps, &inst, &cfg).map_err(|e| e.to_string())?;
    let kinds = r.kind_names.len();
    json(&Series {
        times: r.kind_series.iter().map(|s| s.time).collect(),
        counts: (0..kinds).map(|k| r.kind_series.iter().map(|s| s.counts[k]).collect()).collect(),
        kind_names: r.kind_names.clone(),
        success: r.success(),
        stop: format!("{:?}", r.stop),
        end_time: r.end_time,
        communications: r.communications_total,
        consensus_time: r.consensus_time,
        terminal_time: r.terminal_time,
        kind_entries: r.kind_entries,
    })
}

/// Reachability report for a toy table (by name) or for a protocol at `n`.
/// `c0_scale` shrinks the simple-async universe to something enumerable.
pub fn analyze_target(target: &str, mode: &str, n: u32, c0_scale: f64) -> Result<String, String> {
    let mode = match mode {
        "async" => Mode::Async,
        "sync" => Mode::Sync,
        other => return Err(format!("unknown mode `{other}`")),
    };
    let report = match toys::by_name(target) {
        Some(t) => analyzer::analyze(&t, mode, ANALYZER_LIMIT),
        None => analyze_params(&params(target, n, Some(c0_scale))?, ANALYZER_LIMIT),
    }
    .map_err(|e| e.to_string())?;
    json(&report)
}

#[derive(Serialize)]
struct Cell {
    n: u32,
    runs: u32,
    /// Runs that ended all-terminal on the majority bit.
    successes: u32,
    /// Runs in which every belief settled on the majority bit.
    consensus: u32,
    mean_cost_per_n: f64,
    mean_end_time: f64,
}

/// `reps` desk-preset runs at each size.
pub fn small_sweep(protocol: &str, sizes: &[u32], p: f64, reps: u32) -> Result<String, String> {
    let mut cells = Vec::new();
    for &n in sizes {
        let ps = params(protocol, n, None)?;
        let (mut ok, mut agreed, mut cost, mut time) = (0, 0, 0.0, 0.0);
        for rep in 0..reps {
            let seed = u64::from(n) << 32 | u64::from(rep);
            let inst = make_instance(n as usize, p, seed).map_err(|e| e.to_string())?;
            let cfg = SimConfig::new(seed ^ 0x5eed, Some(ps.suggested_horizon()));
            let r = simulate(&ps, &inst, &cfg).map_err(|e| e.to_string())?;
            ok += u32::from(r.success());
            agreed += u32::from(r.consensus_time.is_some());
            cost += r.communications_total as f64 / f64::from(n);
            time += r.end_time;
        }
        cells.push(Cell {
            n,
            runs: reps,
            successes: ok,
            consensus: agreed,
            mean_cost_per_n: cost / f64::from(reps.max(1)),
            mean_end_time: time / f64::from(reps.max(1)),
        });
    }
    json(&cells)
}

#[wasm_bindgen]
pub fn simulate_series(protocol: &str, n: u32, p: f64, seed: u32) -> Result<String, JsError> {
    run_series(protocol, n, p, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn analyze(target: &str, mode: &str, n: u32, c0_scale: f64) -> Result<String, JsError> {
    analyze_target(target, mode, n, c0_scale).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn sweep(protocol: &str, sizes: Vec<u32>, p: f64, reps: u32) -> Result<String, JsError> {
    small_sweep(protocol, &sizes, p, reps).map_err(|e| JsError::new(&e))
}

/// Names of the built-in toy tables.
#[wasm_bindgen]
pub fn toy_names() -> Vec<String> {
    toys::all().iter().map(|t| t.spec().name.clone()).collect()
}
