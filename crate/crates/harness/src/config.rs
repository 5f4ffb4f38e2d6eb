//! Experiment configuration and its JSON form.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use lowmem_core::params::MIN_NODES;
use lowmem_core::{derive_params, Overrides, ParamSet, Preset, ProtocolId};
use serde::{Deserialize, Serialize};

use crate::{HarnessError, Result};

/// One sweep: a grid over `n_list x p_list` with `repetitions` seeds per cell.
///
/// Scale factors start from `preset` and are then replaced key by key by
/// `overrides`. A missing `horizon` means the protocol's suggested horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub protocol: ProtocolId,
    pub n_list: Vec<u64>,
    pub p_list: Vec<f64>,
    pub epsilon: f64,
    #[serde(default)]
    pub seed_base: u64,
    pub repetitions: u32,
    #[serde(default = "default_preset")]
    pub preset: Preset,
    #[serde(default)]
    pub overrides: BTreeMap<String, f64>,
    #[serde(default)]
    pub horizon: Option<f64>,
    /// Record the set of visited states (memory audit).
    #[serde(default)]
    pub audit: bool,
    #[serde(default)]
    pub output: OutputPaths,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    /// Defaults to the CSV path with a `.json` extension.
    pub sidecar: Option<PathBuf>,
}

fn default_preset() -> Preset {
    Preset::Desk
}

impl ExperimentConfig {
    /// A single-cell configuration with defaults for everything else.
    pub fn single(protocol: ProtocolId, n: u64, p: f64, epsilon: f64, repetitions: u32) -> ExperimentConfig {
        ExperimentConfig {
            protocol,
            n_list: vec![n],
            p_list: vec![p],
            epsilon,
            seed_base: 0,
            repetitions,
            preset: Preset::Desk,
            overrides: BTreeMap::new(),
            horizon: None,
            audit: false,
            output: OutputPaths::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        ExperimentConfig::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Preset factors with the explicit overrides applied.
    pub fn resolved_overrides(&self) -> Result<Overrides> {
        let mut o = self.preset.overrides(self.protocol);
        for (k, &v) in &self.overrides {
            o.set(k, v).map_err(HarnessError::Config)?;
        }
        Ok(o)
    }

    /// Label written to every CSV row.
    pub fn preset_label(&self) -> String {
        if self.overrides.is_empty() {
            self.preset.to_string()
        } else {
            format!("{}+custom", self.preset)
        }
    }

    pub fn params(&self, n: u64) -> Result<ParamSet> {
        Ok(derive_params(self.protocol, n, self.epsilon, self.resolved_overrides()?)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.repetitions < 1 {
            return bad("repetitions must be at least 1".into());
        }
        if self.n_list.is_empty() || self.p_list.is_empty() {
            return bad("n_list and p_list must not be empty".into());
        }
        if let Some(&n) = self.n_list.iter().find(|&&n| n < MIN_NODES) {
            return bad(format!("n = {n} is below the minimum of {MIN_NODES}"));
        }
        if let Some(&p) = self.p_list.iter().find(|p| !(0.5..=1.0).contains(*p)) {
            return bad(format!("p = {p} outside [0.5, 1]"));
        }
        if let Some(h) = self.horizon {
            if h.is_nan() || h <= 0.0 {
                return bad(format!("horizon must be positive, got {h}"));
            }
        }
        for &n in &self.n_list {
            self.params(n)?;
        }
        Ok(())
    }
}
