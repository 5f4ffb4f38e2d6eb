//! Least-squares power-law fits `y = c x^b` on log-log axes.

use serde::{Deserialize, Serialize};

use crate::sweep::Row;
use crate::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub exponent: f64,
    pub constant: f64,
    /// Root mean square of the log residuals.
    pub residual: f64,
    pub points: usize,
}

/// Fits `ln y = ln c + b ln x`. Needs at least four distinct `x` and positive data.
pub fn fit_scaling(points: &[(f64, f64)]) -> Result<Fit> {
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(HarnessError::Fit("all points must be positive and finite".into()));
    }
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 4 {
        return Err(HarnessError::Fit(format!("need at least 4 distinct x values, got {}", xs.len())));
    }
    let m = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let sse: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - a - b * x).powi(2)).sum();
    Ok(Fit {
        exponent: b,
        constant: a.exp(),
        residual: (sse / m).sqrt(),
        points: points.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    CommunicationsTotal,
    NConsensus,
    NTerminal,
    TerminalTime,
}

impl Metric {
    pub fn of(self, r: &Row) -> Option<f64> {
        match self {
            Metric::CommunicationsTotal => r.communications_total.map(|v| v as f64),
            Metric::NConsensus => r.n_consensus.map(|v| v as f64),
            Metric::NTerminal => r.n_terminal.map(|v| v as f64),
            Metric::TerminalTime => r.terminal_time,
        }
    }
}

/// Fit of `metric` against `n` over the rows that report it.
pub fn fit_rows(rows: &[Row], metric: Metric) -> Result<Fit> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| metric.of(r).map(|y| (r.n as f64, y)))
        .collect();
    fit_scaling(&pts)
}
