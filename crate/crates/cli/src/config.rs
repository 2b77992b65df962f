//! Run configuration: a TOML file with one section per stage.
//!
//! Precedence is built-in defaults, then the config file, then command-line
//! flags. Unknown keys anywhere in the file are rejected.

use std::path::Path;

use funcausal_core::analysis::BootstrapConfig;
use funcausal_core::dgp::DgpConfig;
use funcausal_core::mechanism::{MechanismKind, MechanismSpec};
use funcausal_core::model::Hyperparams;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MechanismConfig {
    pub kind: MechanismKind,
    pub threshold_c: Option<f64>,
    pub amplitude_a: Option<f64>,
    pub clip_lo: Option<f64>,
    pub clip_hi: Option<f64>,
}

impl Default for MechanismConfig {
    fn default() -> Self {
        MechanismConfig {
            kind: MechanismKind::Threshold,
            threshold_c: None,
            amplitude_a: None,
            clip_lo: None,
            clip_hi: None,
        }
    }
}

impl MechanismConfig {
    pub fn spec_for(&self, kind: MechanismKind) -> MechanismSpec {
        let mut s = MechanismSpec::new(kind);
        if let Some(v) = self.threshold_c {
            s.threshold_c = v;
        }
        if let Some(v) = self.amplitude_a {
            s.amplitude_a = v;
        }
        if let Some(v) = self.clip_lo {
            s.clip_lo = v;
        }
        if let Some(v) = self.clip_hi {
            s.clip_hi = v;
        }
        s
    }

    pub fn spec(&self) -> MechanismSpec {
        self.spec_for(self.kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub points: usize,
    pub lo_pct: f64,
    pub hi_pct: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { points: 81, lo_pct: 2.0, hi_pct: 98.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegimeConfig {
    pub n_bins: usize,
    /// Variable whose most recent lag defines the regimes; empty means the
    /// edge's target.
    pub variable: String,
}

impl Default for RegimeConfig {
    fn default() -> Self {
        RegimeConfig { n_bins: 3, variable: String::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowScope {
    All,
    Train,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScoresConfig {
    pub metric: String,
    pub windows: WindowScope,
}

impl Default for ScoresConfig {
    fn default() -> Self {
        ScoresConfig { metric: "sd".into(), windows: WindowScope::All }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchmarkConfig {
    pub runs: usize,
    pub base_seed: u64,
    /// Lag length used for the synthetic systems (the data are lag-1).
    pub max_lag: usize,
    pub mechanisms: Vec<MechanismKind>,
    /// Map the grid back to the raw source scale before evaluating the true
    /// mechanism for the recovery correlation.
    pub recovery_on_raw_scale: bool,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            runs: 15,
            base_seed: 1000,
            max_lag: 4,
            mechanisms: MechanismKind::ALL.to_vec(),
            recovery_on_raw_scale: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurveySection {
    pub score_threshold: f64,
    pub include_self: bool,
}

impl Default for SurveySection {
    fn default() -> Self {
        SurveySection { score_threshold: 0.005, include_self: false }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub mechanism: MechanismConfig,
    pub dgp: DgpConfig,
    pub model: Hyperparams,
    pub grid: GridConfig,
    pub regimes: RegimeConfig,
    pub bootstrap: BootstrapConfig,
    pub benchmark: BenchmarkConfig,
    pub survey: SurveySection,
    pub scores: ScoresConfig,
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Single-line JSON form embedded in output metadata.
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}
