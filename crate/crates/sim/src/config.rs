//! Experiment configuration.
//!
//! A configuration starts from a preset system (`full` or `desk`), takes
//! command-line flags, and is then overridden key by key by an optional TOML
//! file. `XLRIS_SEED` in the environment overrides the seed last.
//!
//! TOML schema (all keys optional; nested tables mirror [`SystemConfig`]):
//!
//! ```toml
//! seed = 7
//! schemes = ["exhaustive", "pnbt", "improved_pnbt"]
//! snr_db = [0.0, 5.0, 10.0]
//! n_trials = 500
//! sampling_interval = 8      # D
//! top_k = 2                  # K
//! top_l = 5                  # L
//! coarsening = 5             # hierarchical cell size c
//! total_slots = 3000         # T_tot
//! noisy_probes = true
//! predictor = "oracle"       # "oracle" | "uniform" | "external:<command>"
//!
//! [dataset]
//! probe_type = "near_subsampled"   # or "far_field"
//! n_samples = 2000
//! snr_db = 10.0
//!
//! [system]
//! carrier_hz = 30e9
//! user_height = 0.0
//! [system.grid]
//! s_x_count = 20
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use xlris_core::SystemConfig;

use crate::error::{Result, SimError};

pub const SEED_ENV: &str = "XLRIS_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Full,
    Desk,
}

impl Preset {
    pub fn system(self) -> SystemConfig {
        match self {
            Preset::Full => SystemConfig::full(),
            Preset::Desk => SystemConfig::desk(),
        }
    }
}

impl FromStr for Preset {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Preset::Full),
            "desk" => Ok(Preset::Desk),
            _ => Err(SimError::Config(format!("unknown preset `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Exhaustive,
    Hierarchical,
    Fbt,
    Pnbt,
    ImprovedPnbt,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 5] = [
        SchemeKind::Exhaustive,
        SchemeKind::Hierarchical,
        SchemeKind::Fbt,
        SchemeKind::Pnbt,
        SchemeKind::ImprovedPnbt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Exhaustive => "exhaustive",
            SchemeKind::Hierarchical => "hierarchical",
            SchemeKind::Fbt => "fbt",
            SchemeKind::Pnbt => "pnbt",
            SchemeKind::ImprovedPnbt => "improved_pnbt",
        }
    }

    pub fn uses_predictor(self) -> bool {
        matches!(self, SchemeKind::Fbt | SchemeKind::Pnbt | SchemeKind::ImprovedPnbt)
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| SimError::Config(format!("unknown scheme `{s}`")))
    }
}

/// Which predictor backs the learned schemes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PredictorBinding {
    /// One-hot at the true label (test double).
    Oracle,
    /// Uniform distributions.
    Uniform,
    /// External process: program followed by its fixed arguments,
    /// whitespace-separated.
    External(String),
}

impl FromStr for PredictorBinding {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oracle" => Ok(PredictorBinding::Oracle),
            "uniform" => Ok(PredictorBinding::Uniform),
            _ => match s.strip_prefix("external:") {
                Some(cmd) if !cmd.trim().is_empty() => Ok(PredictorBinding::External(cmd.trim().to_string())),
                _ => Err(SimError::Config(format!(
                    "predictor must be `oracle`, `uniform` or `external:<command>`, got `{s}`"
                ))),
            },
        }
    }
}

impl TryFrom<String> for PredictorBinding {
    type Error = SimError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PredictorBinding> for String {
    fn from(p: PredictorBinding) -> String {
        match p {
            PredictorBinding::Oracle => "oracle".into(),
            PredictorBinding::Uniform => "uniform".into(),
            PredictorBinding::External(cmd) => format!("external:{cmd}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeType {
    FarField,
    NearSubsampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSettings {
    pub probe_type: ProbeType,
    pub n_samples: usize,
    pub snr_db: f64,
    /// Fraction written to `train/`, the rest to `eval/`; no split if unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub schemes: Vec<SchemeKind>,
    pub snr_db: Vec<f64>,
    pub n_trials: usize,
    /// PNBT sampling interval D.
    pub sampling_interval: usize,
    pub top_k: usize,
    pub top_l: usize,
    /// Hierarchical cell size.
    pub coarsening: usize,
    /// Slots per coherence interval for the effective rate.
    pub total_slots: usize,
    /// Probe with receiver noise; when false the metrics still use the SNR.
    pub noisy_probes: bool,
    pub predictor: PredictorBinding,
    pub dataset: DatasetSettings,
    pub system: SystemConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        let (d, n_trials, n_samples) = match preset {
            Preset::Full => (20, 1000, 20_000),
            Preset::Desk => (8, 500, 2000),
        };
        ExperimentConfig {
            seed: 1,
            schemes: SchemeKind::ALL.to_vec(),
            snr_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
            n_trials,
            sampling_interval: d,
            top_k: 2,
            top_l: 5,
            coarsening: 5,
            total_slots: 3000,
            noisy_probes: true,
            predictor: PredictorBinding::Uniform,
            dataset: DatasetSettings {
                probe_type: ProbeType::NearSubsampled,
                n_samples,
                snr_db: 10.0,
                split: None,
            },
            system: preset.system(),
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if self.n_trials == 0 {
            return Err(SimError::Config("n_trials must be at least 1".into()));
        }
        if self.snr_db.is_empty() {
            return Err(SimError::Config("snr_db list is empty".into()));
        }
        if self.schemes.is_empty() {
            return Err(SimError::Config("no schemes selected".into()));
        }
        if self.sampling_interval == 0 {
            return Err(SimError::Config("sampling_interval must be at least 1".into()));
        }
        if self.coarsening == 0 {
            return Err(SimError::Config("coarsening must be at least 1".into()));
        }
        if self.top_k == 0 || self.top_k > self.system.grid.s_x_count {
            return Err(SimError::Config("top_k must lie in 1..=S_x".into()));
        }
        if self.top_l == 0 || self.top_l > self.system.grid.s_y_count {
            return Err(SimError::Config("top_l must lie in 1..=S_y".into()));
        }
        if self.total_slots == 0 {
            return Err(SimError::Config("total_slots must be at least 1".into()));
        }
        if let Some(f) = self.dataset.split {
            if !(f > 0.0 && f < 1.0) {
                return Err(SimError::Config("split fraction must lie in (0, 1)".into()));
            }
        }
        Ok(())
    }

    /// Overlays the keys present in a TOML document.
    pub fn merge_toml(&self, text: &str) -> Result<Self> {
        let overlay: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| SimError::Config(e.to_string()))?;
        let mut base = toml::Table::try_from(self).map_err(|e| SimError::Config(e.to_string()))?;
        merge_tables(&mut base, overlay);
        base.try_into()
            .map_err(|e: toml::de::Error| SimError::Config(e.to_string()))
    }

    pub fn merge_file(&self, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        self.merge_toml(&text)
    }

    /// Applies `XLRIS_SEED` when set.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(raw) = std::env::var(SEED_ENV) {
            self.seed = raw
                .trim()
                .parse()
                .map_err(|_| SimError::Config(format!("{SEED_ENV}=`{raw}` is not a u64")))?;
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| SimError::Config(e.to_string()))
    }
}

fn merge_tables(base: &mut toml::Table, overlay: toml::Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge_tables(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}
