use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use lowmem_core::analyzer::{self, toys, Mode, DEFAULT_STATE_LIMIT};
use lowmem_core::dispatch::analyze_params;
use lowmem_core::{Preset, ProtocolId};
use lowmem_harness::{fit_rows, run_one, run_sweep, summarize, write_csv, write_sidecar, ExperimentConfig, Metric};

#[derive(Parser)]
#[command(name = "lowmem", version, about = "Simulate and analyze memory-constrained majority consensus protocols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a single run and print its metrics.
    Run(RunArgs),
    /// Run a grid of (n, p, repetition) and write CSV plus a JSON sidecar.
    Sweep(SweepArgs),
    /// Reachable-state analysis and state classification.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long, value_parser = parse_protocol)]
    protocol: Option<ProtocolId>,
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,
    #[arg(long, default_value = "desk", value_parser = parse_preset)]
    preset: Preset,
    /// Scale factor `key=value`; may be repeated.
    #[arg(long = "override", value_parser = parse_override)]
    overrides: Vec<(String, f64)>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 4096)]
    n: u64,
    #[arg(long, default_value_t = 0.75)]
    p: f64,
    /// Repetition index; the run seed is derived from it and --seed-base.
    #[arg(long, default_value_t = 0)]
    seed: u32,
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    #[arg(long)]
    horizon: Option<f64>,
    /// Write the full result as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// JSON configuration; other grid flags are then ignored.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    n: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "0.75")]
    p: Vec<f64>,
    /// Repetitions per (n, p) cell.
    #[arg(long, default_value_t = 10)]
    seeds: u32,
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    #[arg(long)]
    horizon: Option<f64>,
    /// Record visited states for the memory audit.
    #[arg(long)]
    audit: bool,
    /// CSV path; the sidecar goes next to it with a .json extension.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Also fit this metric against n (communications_total, n_consensus, n_terminal, terminal_time).
    #[arg(long, value_parser = parse_metric)]
    fit: Option<Metric>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1024)]
    n: u64,
    /// Analyze a built-in toy table instead of a protocol.
    #[arg(long, conflicts_with = "protocol")]
    toy: Option<String>,
    /// Model for toys: async or sync.
    #[arg(long, default_value = "async")]
    mode: String,
    #[arg(long, default_value_t = DEFAULT_STATE_LIMIT)]
    limit: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_protocol(s: &str) -> Result<ProtocolId, String> {
    s.parse()
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse()
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("unknown metric `{s}`"))
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected key=value")?;
    let v: f64 = v.parse().map_err(|_| format!("`{v}` is not a number"))?;
    Ok((k.trim().to_string(), v))
}

impl Common {
    fn config(&self, n_list: Vec<u64>, p_list: Vec<f64>, reps: u32) -> Result<ExperimentConfig> {
        let Some(protocol) = self.protocol else {
            bail!("--protocol is required");
        };
        let mut cfg = ExperimentConfig::single(protocol, 16, 0.75, self.epsilon, reps);
        cfg.n_list = n_list;
        cfg.p_list = p_list;
        cfg.preset = self.preset;
        cfg.overrides = self.overrides.iter().cloned().collect::<BTreeMap<_, _>>();
        Ok(cfg)
    }
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or("-".into(), |x| x.to_string())
}

fn run(a: RunArgs) -> Result<()> {
    let mut cfg = a.common.config(vec![a.n], vec![a.p], a.seed + 1)?;
    cfg.seed_base = a.seed_base;
    cfg.horizon = a.horizon;
    cfg.validate()?;
    let (row, result) = run_one(&cfg, a.n, a.p, a.seed);
    let Some(result) = result else {
        bail!("run failed: {}", row.error);
    };
    println!("protocol        {} ({})", row.protocol, row.preset);
    println!("n, p            {}, {}", row.n, row.p);
    println!("success         {}", row.success);
    println!("stop            {} at t = {:.3}", row.stop, result.end_time);
    println!("communications  {} ({:.2} per node)", result.communications_total, result.communications_total as f64 / a.n as f64);
    println!("consensus       t = {}, N = {}", opt(result.consensus_time), opt(result.communications_at_consensus));
    println!("terminal        t = {}, N = {}", opt(result.terminal_time), opt(result.communications_at_terminal));
    println!("per type costs  {}", row.per_type_costs);
    println!("type entries    {}", row.type_entries);
    if let Some(path) = a.out {
        let f = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        serde_json::to_writer_pretty(f, &result)?;
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?,
        None => {
            if a.n.is_empty() {
                bail!("give --n (comma separated) or --config");
            }
            let mut c = a.common.config(a.n.clone(), a.p.clone(), a.seeds)?;
            c.seed_base = a.seed_base;
            c.horizon = a.horizon;
            c.audit = a.audit;
            c
        }
    };
    if let Some(out) = &a.out {
        cfg.output.csv = Some(out.clone());
    }
    cfg.validate()?;
    let rows = run_sweep(&cfg, a.workers)?;
    match &cfg.output.csv {
        Some(path) => {
            write_csv(&rows, BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))?;
            let side = cfg.output.sidecar.clone().unwrap_or_else(|| path.with_extension("json"));
            write_sidecar(&cfg, &rows, &side)?;
            eprintln!("wrote {} rows to {} and {}", rows.len(), path.display(), side.display());
        }
        None => write_csv(&rows, io::stdout().lock())?,
    }
    let mut err = io::stderr().lock();
    writeln!(err, "{:>8} {:>6} {:>5} {:>7} {:>10} {:>12}", "n", "p", "runs", "success", "cost/n", "term. time")?;
    for c in summarize(&rows) {
        writeln!(
            err,
            "{:>8} {:>6} {:>5} {:>7.3} {:>10} {:>12}",
            c.n,
            c.p,
            c.runs,
            c.success_rate,
            opt(c.mean_cost_per_n.map(|v| format!("{v:.2}"))),
            opt(c.mean_terminal_time.map(|v| format!("{v:.1}")))
        )?;
    }
    if let Some(metric) = a.fit {
        let f = fit_rows(&rows, metric)?;
        writeln!(err, "fit: {metric:?} ~ {:.4} * n^{:.4} (rms log residual {:.4})", f.constant, f.exponent, f.residual)?;
    }
    Ok(())
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    let report = match &a.toy {
        Some(name) => {
            let Some(t) = toys::by_name(name) else {
                let names: Vec<String> = toys::all().iter().map(|t| t.spec().name.clone()).collect();
                bail!("unknown toy `{name}` (available: {})", names.join(", "));
            };
            let mode = match a.mode.as_str() {
                "async" => Mode::Async,
                "sync" => Mode::Sync,
                other => bail!("unknown mode `{other}`"),
            };
            analyzer::analyze(&t, mode, a.limit)?
        }
        None => {
            let cfg = a.common.config(vec![a.n], vec![0.75], 1)?;
            analyze_params(&cfg.params(a.n)?, a.limit)?
        }
    };
    println!("protocol    {} ({})", report.protocol, if report.async_mode { "async" } else { "sync" });
    println!("universe    {} declared, {} reachable", report.universe_size, report.reachable_count);
    println!("A(k) sizes  {:?}", report.a_sizes);
    println!("fixed point k* = {}{}", report.fixed_point_index, report.period.map_or(String::new(), |p| format!(", period {p}")));
    println!("terminal    {}", report.terminal_count);
    println!("passive     {}", report.passive_count);
    println!("aware       {}", report.aware_count);
    if let Some(path) = a.out {
        let f = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        serde_json::to_writer_pretty(f, &report)?;
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::Analyze(a) => analyze(a),
    }
}
