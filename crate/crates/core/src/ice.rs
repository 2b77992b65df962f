//! Intervention-style ICE response curves.
//!
//! For window `t`, edge `i -> j` and intervention value `x`,
//! `delta_t(x) = pred_j(lags of i <- x) - pred_j(unmodified)`. Averaging
//! `delta_t(x)` over windows gives the response curve. All interventions are
//! applied in standardized input space and touch only the source's lag
//! slots; the rest of the window, including the target's own lags, is left
//! as observed.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::AdditiveArModel;
use crate::panel::PanelSeries;
use crate::stats;
use crate::window::WindowSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub values: Vec<f64>,
    pub lo_pct: f64,
    pub hi_pct: f64,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Evenly spaced points between the `lo_pct` and `hi_pct` percentiles of
    /// `observed`. The endpoints are percentiles of the data, so the grid
    /// never leaves the observed range.
    pub fn from_observed(observed: &[f64], points: usize, lo_pct: f64, hi_pct: f64) -> Result<Grid> {
        if points < 2 {
            return Err(invalid("points", "at least 2 grid points are required"));
        }
        if !(0.0 <= lo_pct && lo_pct < hi_pct && hi_pct <= 100.0) {
            return Err(invalid("percentiles", "need 0 <= lo < hi <= 100"));
        }
        if observed.is_empty() {
            return Err(invalid("observed", "no values"));
        }
        let mut sorted = observed.to_vec();
        sorted.sort_by(f64::total_cmp);
        let lo = stats::percentile_sorted(&sorted, lo_pct);
        let hi = stats::percentile_sorted(&sorted, hi_pct);
        if !(hi > lo) {
            return Err(invalid("grid", "degenerate percentile range (constant variable?)"));
        }
        let step = (hi - lo) / (points - 1) as f64;
        let mut values: Vec<f64> = (0..points).map(|k| lo + step * k as f64).collect();
        values[points - 1] = hi;
        Ok(Grid { values, lo_pct, hi_pct })
    }
}

/// Grid over variable `var` of a standardized panel.
pub fn make_grid(panel: &PanelSeries, var: usize, points: usize, lo_pct: f64, hi_pct: f64) -> Result<Grid> {
    if var >= panel.n_vars() {
        return Err(Error::OutOfRange(format!("variable {var}")));
    }
    Grid::from_observed(&panel.column(var), points, lo_pct, hi_pct)
}

/// Which lag slots of the source receive the intervention value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intervention {
    /// Every lag of the source is set to `x` (sustained-value intervention).
    AllLags,
    /// Only lag `l` (1 = most recent) is set to `x`.
    Lag(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeVariable {
    /// Most recent lag of the edge's target variable.
    TargetLag,
    /// Most recent lag of an explicit variable.
    VariableLag(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeSpec {
    pub variable: RegimeVariable,
    pub n_bins: usize,
}

impl Default for RegimeSpec {
    fn default() -> Self {
        RegimeSpec { variable: RegimeVariable::TargetLag, n_bins: 3 }
    }
}

/// Equal-count regime bins over a window set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeAssignment {
    pub labels: Vec<usize>,
    pub n_bins: usize,
    pub counts: Vec<usize>,
    /// Smallest and largest regime value in each bin.
    pub bounds: Vec<(f64, f64)>,
}

impl RegimeSpec {
    pub fn assign(&self, ws: &WindowSet, target: usize) -> Result<RegimeAssignment> {
        let var = match self.variable {
            RegimeVariable::TargetLag => target,
            RegimeVariable::VariableLag(v) => v,
        };
        if var >= ws.n_vars() {
            return Err(Error::OutOfRange(format!("regime variable {var}")));
        }
        if self.n_bins == 0 {
            return Err(invalid("n_bins", "must be positive"));
        }
        let values = ws.last_lag(var);
        let labels = stats::equal_count_bins(&values, self.n_bins)?;
        RegimeAssignment::from_labels(labels, &values, self.n_bins)
    }
}

impl RegimeAssignment {
    pub fn from_labels(labels: Vec<usize>, values: &[f64], n_bins: usize) -> Result<Self> {
        let mut counts = vec![0usize; n_bins];
        let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); n_bins];
        for (&b, &v) in labels.iter().zip(values) {
            if b >= n_bins {
                return Err(Error::OutOfRange(format!("bin label {b}")));
            }
            counts[b] += 1;
            bounds[b].0 = bounds[b].0.min(v);
            bounds[b].1 = bounds[b].1.max(v);
        }
        if let Some(b) = counts.iter().position(|&c| c == 0) {
            return Err(Error::EmptyBin { bin: b });
        }
        Ok(RegimeAssignment { labels, n_bins, counts, bounds })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveVariant {
    Aggregated,
    LagSpecific,
    Regime,
}

impl CurveVariant {
    pub fn name(self) -> &'static str {
        match self {
            CurveVariant::Aggregated => "aggregated",
            CurveVariant::LagSpecific => "lag",
            CurveVariant::Regime => "regime",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: usize,
    pub target: usize,
    pub source_name: Option<String>,
    pub target_name: Option<String>,
    pub variant: CurveVariant,
    pub lag: Option<usize>,
    pub n_windows: usize,
}

/// Pointwise band; `lower[k] <= upper[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseCurve {
    pub grid: Vec<f64>,
    pub response: Vec<f64>,
    /// Per-regime-bin responses, low bin first.
    pub bins: Option<Vec<Vec<f64>>>,
    pub bin_counts: Option<Vec<usize>>,
    pub band: Option<Band>,
    pub bin_bands: Option<Vec<Band>>,
    pub provenance: Provenance,
}

impl ResponseCurve {
    /// Max minus min of the response.
    pub fn range(&self) -> f64 {
        stats::range(&self.response)
    }
}

/// `delta_t(x)` for every grid point and window, grid-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaMatrix {
    pub n_grid: usize,
    pub n_windows: usize,
    pub values: Vec<f64>,
}

impl DeltaMatrix {
    #[inline]
    pub fn row(&self, g: usize) -> &[f64] {
        &self.values[g * self.n_windows..(g + 1) * self.n_windows]
    }

    /// Mean over the windows in `idx` (in the given order) at every grid point.
    pub fn mean_over(&self, idx: &[usize]) -> Vec<f64> {
        (0..self.n_grid)
            .map(|g| {
                let row = self.row(g);
                idx.iter().map(|&w| row[w]).sum::<f64>() / idx.len() as f64
            })
            .collect()
    }

    pub fn mean_all(&self) -> Vec<f64> {
        (0..self.n_grid).map(|g| self.row(g).iter().sum::<f64>() / self.n_windows as f64).collect()
    }

    /// Per-bin means given a bin label per window.
    pub fn bin_means(&self, labels: &[usize], n_bins: usize) -> Result<Vec<Vec<f64>>> {
        let mut counts = vec![0usize; n_bins];
        for &b in labels {
            counts[b] += 1;
        }
        if let Some(b) = counts.iter().position(|&c| c == 0) {
            return Err(Error::EmptyBin { bin: b });
        }
        let mut out = vec![vec![0.0; self.n_grid]; n_bins];
        for g in 0..self.n_grid {
            let row = self.row(g);
            for (w, &b) in labels.iter().enumerate() {
                out[b][g] += row[w];
            }
            for b in 0..n_bins {
                out[b][g] /= counts[b] as f64;
            }
        }
        Ok(out)
    }
}

fn check_edge(model: &AdditiveArModel, ws: &WindowSet, edge: (usize, usize)) -> Result<()> {
    let n = model.n_vars();
    if edge.0 >= n || edge.1 >= n {
        return Err(Error::OutOfRange(format!("edge {} -> {} with {} variables", edge.0, edge.1, n)));
    }
    if ws.n_vars() != n || ws.lag() != model.lag() {
        return Err(Error::Shape("model and windows disagree on dimensions".into()));
    }
    if ws.is_empty() {
        return Err(invalid("windows", "no windows"));
    }
    model.check_stats(ws.stats())
}

/// Computes `delta_t(x)` for every grid point (outer) and window (inner).
///
/// Baseline contributions are computed once per window; for each grid point
/// only the intervened source network is re-evaluated and the prediction is
/// reassembled in the same source order as an unmodified forward pass.
pub fn deltas(
    model: &AdditiveArModel,
    ws: &WindowSet,
    edge: (usize, usize),
    grid: &[f64],
    intervention: Intervention,
) -> Result<DeltaMatrix> {
    check_edge(model, ws, edge)?;
    let (src, tgt) = edge;
    let (n, k, w_count) = (model.n_vars(), model.lag(), ws.len());
    if let Intervention::Lag(l) = intervention {
        if l == 0 || l > k {
            return Err(Error::OutOfRange(format!("lag {l} outside 1..={k}")));
        }
    }
    // baseline contributions to the target, window-major
    let mut base = vec![0.0; w_count * n];
    let mut base_pred = vec![0.0; w_count];
    let mut full = vec![0.0; n * n];
    for w in 0..w_count {
        let inputs = ws.inputs(w);
        for i in 0..n {
            full[i * n + tgt] = model.contribution(i, tgt, &inputs[i * k..(i + 1) * k]);
            base[w * n + i] = full[i * n + tgt];
        }
        base_pred[w] = model.assemble(tgt, &full);
    }
    let beta = model.bias(tgt);
    let mut values = vec![0.0; grid.len() * w_count];
    let mut lags = vec![0.0; k];
    for (g, &x) in grid.iter().enumerate() {
        for w in 0..w_count {
            match intervention {
                Intervention::AllLags => lags.iter_mut().for_each(|v| *v = x),
                Intervention::Lag(l) => {
                    lags.copy_from_slice(ws.lags(w, src));
                    lags[l - 1] = x;
                }
            }
            let f = model.contribution(src, tgt, &lags);
            let row = &base[w * n..(w + 1) * n];
            let mut pred = beta;
            for i in 0..n {
                pred += if i == src { f } else { row[i] };
            }
            values[g * w_count + w] = pred - base_pred[w];
        }
    }
    Ok(DeltaMatrix { n_grid: grid.len(), n_windows: w_count, values })
}

fn provenance(ws: &WindowSet, edge: (usize, usize), variant: CurveVariant, lag: Option<usize>) -> Provenance {
    Provenance {
        source: edge.0,
        target: edge.1,
        source_name: None,
        target_name: None,
        variant,
        lag,
        n_windows: ws.len(),
    }
}

/// Lag-aggregated curve: all K lags of the source set to `x`.
pub fn ice_lag_aggregated(
    model: &AdditiveArModel,
    ws: &WindowSet,
    edge: (usize, usize),
    grid: &Grid,
) -> Result<ResponseCurve> {
    let d = deltas(model, ws, edge, &grid.values, Intervention::AllLags)?;
    Ok(ResponseCurve {
        grid: grid.values.clone(),
        response: d.mean_all(),
        bins: None,
        bin_counts: None,
        band: None,
        bin_bands: None,
        provenance: provenance(ws, edge, CurveVariant::Aggregated, None),
    })
}

/// Lag-specific curve: only lag `lag` (1 = most recent) is set to `x`.
pub fn ice_lag_specific(
    model: &AdditiveArModel,
    ws: &WindowSet,
    edge: (usize, usize),
    lag: usize,
    grid: &Grid,
) -> Result<ResponseCurve> {
    let d = deltas(model, ws, edge, &grid.values, Intervention::Lag(lag))?;
    Ok(ResponseCurve {
        grid: grid.values.clone(),
        response: d.mean_all(),
        bins: None,
        bin_counts: None,
        band: None,
        bin_bands: None,
        provenance: provenance(ws, edge, CurveVariant::LagSpecific, Some(lag)),
    })
}

/// Regime-conditional curves: per-bin means of `delta_t(x)` plus the
/// unconditional mean. `intervention` selects aggregated or lag-specific
/// substitution.
pub fn ice_regime_conditional(
    model: &AdditiveArModel,
    ws: &WindowSet,
    edge: (usize, usize),
    grid: &Grid,
    regimes: &RegimeSpec,
    intervention: Intervention,
) -> Result<ResponseCurve> {
    check_edge(model, ws, edge)?;
    let assignment = regimes.assign(ws, edge.1)?;
    let d = deltas(model, ws, edge, &grid.values, intervention)?;
    regime_curve(&d, &assignment, grid, ws, edge, intervention)
}

pub(crate) fn regime_curve(
    d: &DeltaMatrix,
    assignment: &RegimeAssignment,
    grid: &Grid,
    ws: &WindowSet,
    edge: (usize, usize),
    intervention: Intervention,
) -> Result<ResponseCurve> {
    let bins = d.bin_means(&assignment.labels, assignment.n_bins)?;
    let lag = match intervention {
        Intervention::AllLags => None,
        Intervention::Lag(l) => Some(l),
    };
    Ok(ResponseCurve {
        grid: grid.values.clone(),
        response: d.mean_all(),
        bins: Some(bins),
        bin_counts: Some(assignment.counts.clone()),
        band: None,
        bin_bands: None,
        provenance: provenance(ws, edge, CurveVariant::Regime, lag),
    })
}
