//! Lag windows over a panel. A window never crosses a unit boundary.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::panel::{ColumnStats, PanelSeries};

/// One owned lag window. `inputs` is laid out variable-major: the K lags of
/// variable `i` occupy `inputs[i*K..(i+1)*K]`, most recent lag (`t-1`) first.
#[derive(Debug, Clone, PartialEq)]
pub struct LagWindow {
    pub unit: usize,
    pub time: usize,
    pub inputs: Vec<f64>,
    pub target: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowOrigin {
    pub unit: usize,
    /// Index of the target time point within the unit.
    pub time: usize,
}

/// All windows of a panel in contiguous storage, ordered by unit then time.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSet {
    n_vars: usize,
    lag: usize,
    inputs: Vec<f64>,
    targets: Vec<f64>,
    origins: Vec<WindowOrigin>,
    stats: Option<Vec<ColumnStats>>,
}

impl WindowSet {
    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn lag(&self) -> usize {
        self.lag
    }

    pub fn len(&self) -> usize {
        self.origins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origins.is_empty()
    }

    pub fn origins(&self) -> &[WindowOrigin] {
        &self.origins
    }

    pub fn stats(&self) -> Option<&[ColumnStats]> {
        self.stats.as_deref()
    }

    /// Full input block of window `w` (`n_vars * lag` values).
    #[inline]
    pub fn inputs(&self, w: usize) -> &[f64] {
        let s = self.n_vars * self.lag;
        &self.inputs[w * s..(w + 1) * s]
    }

    /// The K lags of variable `var` in window `w`, most recent first.
    #[inline]
    pub fn lags(&self, w: usize, var: usize) -> &[f64] {
        let base = w * self.n_vars * self.lag + var * self.lag;
        &self.inputs[base..base + self.lag]
    }

    #[inline]
    pub fn targets(&self, w: usize) -> &[f64] {
        &self.targets[w * self.n_vars..(w + 1) * self.n_vars]
    }

    pub fn window(&self, w: usize) -> LagWindow {
        LagWindow {
            unit: self.origins[w].unit,
            time: self.origins[w].time,
            inputs: self.inputs(w).to_vec(),
            target: self.targets(w).to_vec(),
        }
    }

    /// Most recent lag of `var` for every window.
    pub fn last_lag(&self, var: usize) -> Vec<f64> {
        (0..self.len()).map(|w| self.lags(w, var)[0]).collect()
    }

    /// Builds a new set from a subset of windows (in the given order).
    pub fn select(&self, idx: &[usize]) -> WindowSet {
        let mut out = WindowSet {
            n_vars: self.n_vars,
            lag: self.lag,
            inputs: Vec::with_capacity(idx.len() * self.n_vars * self.lag),
            targets: Vec::with_capacity(idx.len() * self.n_vars),
            origins: Vec::with_capacity(idx.len()),
            stats: self.stats.clone(),
        };
        for &w in idx {
            out.inputs.extend_from_slice(self.inputs(w));
            out.targets.extend_from_slice(self.targets(w));
            out.origins.push(self.origins[w]);
        }
        out
    }

    /// Chronological split: the last `frac` of each unit's windows go to the
    /// second index list.
    pub fn chronological_split(&self, frac: f64) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut val = Vec::new();
        let mut start = 0;
        while start < self.len() {
            let unit = self.origins[start].unit;
            let mut end = start;
            while end < self.len() && self.origins[end].unit == unit {
                end += 1;
            }
            let n = end - start;
            let n_val = libm::floor(n as f64 * frac) as usize;
            train.extend(start..end - n_val);
            val.extend(end - n_val..end);
            start = end;
        }
        (train, val)
    }
}

/// Builds every lag window of length `lag` from `panel`: a unit with `L` time
/// points yields `L - lag` windows, in time order.
pub fn build_windows(panel: &PanelSeries, lag: usize) -> Result<WindowSet> {
    if lag == 0 {
        return Err(invalid("lag", "must be positive"));
    }
    let (n_units, n_times, n_vars) = (panel.n_units(), panel.n_times(), panel.n_vars());
    if n_times < lag + 1 {
        return Err(Error::UnitTooShort {
            unit: panel.unit_ids()[0].clone(),
            len: n_times,
            needed: lag + 1,
        });
    }
    let per_unit = n_times - lag;
    let total = n_units * per_unit;
    let mut set = WindowSet {
        n_vars,
        lag,
        inputs: Vec::with_capacity(total * n_vars * lag),
        targets: Vec::with_capacity(total * n_vars),
        origins: Vec::with_capacity(total),
        stats: panel.stats().map(|s| s.to_vec()),
    };
    for u in 0..n_units {
        for t in lag..n_times {
            for i in 0..n_vars {
                for l in 1..=lag {
                    set.inputs.push(panel.get(u, t - l, i));
                }
            }
            for j in 0..n_vars {
                set.targets.push(panel.get(u, t, j));
            }
            set.origins.push(WindowOrigin { unit: u, time: t });
        }
    }
    Ok(set)
}

/// Builds an unattached window set from explicit parts (tests, tooling).
pub fn from_parts(
    n_vars: usize,
    lag: usize,
    inputs: Vec<f64>,
    targets: Vec<f64>,
    origins: Vec<WindowOrigin>,
    stats: Option<Vec<ColumnStats>>,
) -> Result<WindowSet> {
    let w = origins.len();
    if inputs.len() != w * n_vars * lag || targets.len() != w * n_vars {
        return Err(Error::Shape(format!(
            "{} windows need {} inputs and {} targets, got {} and {}",
            w,
            w * n_vars * lag,
            w * n_vars,
            inputs.len(),
            targets.len()
        )));
    }
    Ok(WindowSet { n_vars, lag, inputs, targets, origins, stats })
}
