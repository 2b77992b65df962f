use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean and population standard deviation of one raw variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub mean: f64,
    pub std: f64,
}

impl ColumnStats {
    pub fn apply(&self, raw: f64) -> f64 {
        (raw - self.mean) / self.std
    }

    pub fn invert(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

/// A balanced multivariate panel: every unit has the same gap-free time axis.
///
/// Values are stored unit-major, then time, then variable. `stats` is set once
/// the panel has been standardized and maps standardized values back to the
/// raw scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelSeries {
    unit_ids: Vec<String>,
    var_names: Vec<String>,
    times: Vec<i64>,
    values: Vec<f64>,
    stats: Option<Vec<ColumnStats>>,
}

impl PanelSeries {
    pub fn new(
        unit_ids: Vec<String>,
        var_names: Vec<String>,
        times: Vec<i64>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let expected = unit_ids.len() * times.len() * var_names.len();
        if values.len() != expected {
            return Err(Error::Shape(format!(
                "panel has {} values, expected {} units x {} times x {} variables",
                values.len(),
                unit_ids.len(),
                times.len(),
                var_names.len()
            )));
        }
        if unit_ids.is_empty() || var_names.is_empty() || times.is_empty() {
            return Err(Error::Shape("panel must have at least one unit, time and variable".into()));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let k = var_names.len();
            let t = times.len();
            return Err(Error::NonFinite(format!(
                "unit `{}`, time {}, variable `{}`",
                unit_ids[pos / (k * t)],
                times[(pos / k) % t],
                var_names[pos % k]
            )));
        }
        Ok(PanelSeries { unit_ids, var_names, times, values, stats: None })
    }

    pub fn unit_ids(&self) -> &[String] {
        &self.unit_ids
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn times(&self) -> &[i64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn stats(&self) -> Option<&[ColumnStats]> {
        self.stats.as_deref()
    }

    pub fn n_units(&self) -> usize {
        self.unit_ids.len()
    }

    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    pub fn n_vars(&self) -> usize {
        self.var_names.len()
    }

    #[inline]
    pub fn get(&self, unit: usize, time: usize, var: usize) -> f64 {
        self.values[(unit * self.n_times() + time) * self.n_vars() + var]
    }

    /// All observations of one variable, unit-major then time.
    pub fn column(&self, var: usize) -> Vec<f64> {
        self.values.iter().skip(var).step_by(self.n_vars()).copied().collect()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.var_names.iter().position(|v| v == name)
    }

    /// Z-scores every variable across all units and times.
    ///
    /// Standardizing an already standardized panel composes the statistics so
    /// that `stats` still maps back to the original raw scale.
    pub fn standardize(&self) -> Result<PanelSeries> {
        let stats = (0..self.n_vars())
            .map(|k| {
                let col = self.column(k);
                let mean = crate::stats::mean(&col);
                let std = crate::stats::pop_std(&col);
                if !(std > 0.0) || !std.is_finite() {
                    return Err(Error::ConstantColumn(self.var_names[k].clone()));
                }
                Ok(ColumnStats { mean, std })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = self.standardize_with(&stats)?;
        if let Some(prev) = &self.stats {
            out.stats = Some(
                prev.iter()
                    .zip(&stats)
                    .map(|(p, s)| ColumnStats { mean: p.mean + p.std * s.mean, std: p.std * s.std })
                    .collect(),
            );
        }
        Ok(out)
    }

    /// Applies externally supplied statistics (for example the ones stored
    /// in a trained model) to this panel's raw values.
    pub fn standardize_with(&self, stats: &[ColumnStats]) -> Result<PanelSeries> {
        if stats.len() != self.n_vars() {
            return Err(Error::Shape(format!(
                "{} column statistics for {} variables",
                stats.len(),
                self.n_vars()
            )));
        }
        if let Some(k) = stats.iter().position(|s| !(s.std > 0.0)) {
            return Err(Error::ConstantColumn(self.var_names[k].clone()));
        }
        let k = self.n_vars();
        let values = self.values.iter().enumerate().map(|(p, &v)| stats[p % k].apply(v)).collect();
        Ok(PanelSeries {
            unit_ids: self.unit_ids.clone(),
            var_names: self.var_names.clone(),
            times: self.times.clone(),
            values,
            stats: Some(stats.to_vec()),
        })
    }

    /// Marks the panel as standardized with the given statistics without
    /// touching its values (used when reading back a panel whose values were
    /// already written in standardized space).
    pub fn with_stats(mut self, stats: Vec<ColumnStats>) -> Result<PanelSeries> {
        if stats.len() != self.n_vars() {
            return Err(Error::Shape("stats length".into()));
        }
        self.stats = Some(stats);
        Ok(self)
    }
}
