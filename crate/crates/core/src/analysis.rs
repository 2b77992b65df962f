//! Curve-level analysis: functional-form flags, recovery correlation,
//! bootstrap bands and the edge-wide heterogeneity survey.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ice::{self, DeltaMatrix, Grid, Intervention, RegimeAssignment, RegimeSpec, ResponseCurve};
use crate::mechanism::MechanismSpec;
use crate::model::AdditiveArModel;
use crate::panel::{ColumnStats, PanelSeries};
use crate::rng;
use crate::scores::{self, ScoreMetric};
use crate::stats;
use crate::window::{build_windows, WindowSet};

/// A curve is monotone when fewer than this fraction of adjacent grid steps
/// go against the dominant direction.
pub const MONOTONE_MAX_VIOLATION: f64 = 0.10;
/// Threshold activation: low-bin magnitude below this fraction of the
/// high-bin magnitude.
pub const THRESHOLD_RATIO: f64 = 0.40;
/// Saturation: a tail range below this fraction of the middle range.
pub const SATURATION_RATIO: f64 = 0.15;

/// Statistics behind the four flags. The flags are a pure function of these.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormStatistics {
    /// Fraction of adjacent steps against the majority direction.
    pub violation_frac: f64,
    /// `max|low bin| / max|high bin|` (`+inf` when the high bin is flat at 0).
    pub regime_ratio: f64,
    /// Range of the first quarter of grid points over the middle-half range.
    pub tail_ratio_lo: f64,
    /// Range of the last quarter of grid points over the middle-half range.
    pub tail_ratio_hi: f64,
    /// Adjacent pairs where the aggregate curve crosses or touches zero.
    pub sign_changes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalFormFlags {
    pub monotone: bool,
    pub threshold_activation: bool,
    pub saturating: bool,
    pub regime_reversal: bool,
    pub stats: FormStatistics,
}

impl FormStatistics {
    pub fn flags(&self) -> FunctionalFormFlags {
        FunctionalFormFlags {
            monotone: self.violation_frac < MONOTONE_MAX_VIOLATION,
            threshold_activation: self.regime_ratio < THRESHOLD_RATIO,
            saturating: self.tail_ratio_lo.min(self.tail_ratio_hi) < SATURATION_RATIO,
            regime_reversal: self.sign_changes > 0,
            stats: *self,
        }
    }
}

impl FunctionalFormFlags {
    pub fn any_nonlinear(&self) -> bool {
        !self.monotone || self.threshold_activation || self.saturating || self.regime_reversal
    }
}

/// Fraction of adjacent differences whose sign opposes the majority sign.
/// Zero differences never count as violations; ties in the vote resolve to
/// "increasing".
pub fn violation_fraction(curve: &[f64]) -> f64 {
    let diffs: Vec<f64> = curve.windows(2).map(|w| w[1] - w[0]).collect();
    let up = diffs.iter().filter(|&&d| d > 0.0).count();
    let down = diffs.iter().filter(|&&d| d < 0.0).count();
    let violations = if up >= down { down } else { up };
    violations as f64 / diffs.len() as f64
}

/// Number of adjacent pairs with a strict sign change or an exact zero.
pub fn zero_crossings(curve: &[f64]) -> usize {
    curve.windows(2).filter(|w| w[0] * w[1] < 0.0 || w[0] == 0.0 || w[1] == 0.0).count()
}

/// Tail-to-middle range ratios with tails = first and last quarter of grid
/// points and middle = the remaining half.
pub fn tail_ratios(curve: &[f64]) -> (f64, f64) {
    let g = curve.len();
    let q = g / 4;
    let mid = stats::range(&curve[q..g - q]);
    let ratio = |tail: &[f64]| if mid > 0.0 { stats::range(tail) / mid } else { f64::INFINITY };
    (ratio(&curve[..q]), ratio(&curve[g - q..]))
}

pub fn regime_ratio(low: &[f64], high: &[f64]) -> f64 {
    let hi = stats::max_abs(high);
    if hi > 0.0 {
        stats::max_abs(low) / hi
    } else {
        f64::INFINITY
    }
}

/// Classifies an aggregate curve together with its low- and high-regime bin
/// curves.
pub fn classify(aggregate: &[f64], low: &[f64], high: &[f64]) -> Result<FunctionalFormFlags> {
    if aggregate.len() < 4 {
        return Err(invalid("curve", "at least 4 grid points are required"));
    }
    if low.len() != aggregate.len() || high.len() != aggregate.len() {
        return Err(Error::Shape("bin curves must share the aggregate grid".into()));
    }
    let (tail_ratio_lo, tail_ratio_hi) = tail_ratios(aggregate);
    Ok(FormStatistics {
        violation_frac: violation_fraction(aggregate),
        regime_ratio: regime_ratio(low, high),
        tail_ratio_lo,
        tail_ratio_hi,
        sign_changes: zero_crossings(aggregate),
    }
    .flags())
}

/// Classifies a regime-conditional curve (lowest and highest bins are used
/// for threshold activation).
pub fn classify_curve(curve: &ResponseCurve) -> Result<FunctionalFormFlags> {
    let bins = curve
        .bins
        .as_ref()
        .filter(|b| b.len() >= 2)
        .ok_or_else(|| invalid("bins", "threshold activation needs per-bin curves"))?;
    classify(&curve.response, &bins[0], &bins[bins.len() - 1])
}

/// Pearson correlation between an estimated curve and the true mechanism on
/// the same grid.
pub fn recovery_correlation(estimated: &ResponseCurve, spec: &MechanismSpec) -> Result<f64> {
    recovery_correlation_on(estimated, spec, None)
}

/// As [`recovery_correlation`], but with `source_stats` the standardized grid
/// is first mapped back to the raw source scale on which the mechanism is
/// defined.
pub fn recovery_correlation_on(
    estimated: &ResponseCurve,
    spec: &MechanismSpec,
    source_stats: Option<&ColumnStats>,
) -> Result<f64> {
    let truth: Vec<f64> = estimated
        .grid
        .iter()
        .map(|&x| spec.eval(source_stats.map_or(x, |s| s.invert(x))))
        .collect();
    if stats::range(&estimated.response) == 0.0 {
        return Err(Error::ZeroVariance("estimated curve"));
    }
    if stats::range(&truth) == 0.0 {
        return Err(Error::ZeroVariance("true mechanism on the grid"));
    }
    stats::pearson(&estimated.response, &truth)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub confidence: f64,
    pub seed: u64,
    /// Windows drawn per resample; `None` means the full window count.
    pub resample_size: Option<usize>,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig { resamples: 200, confidence: 0.95, seed: 1000, resample_size: None }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.resamples < 2 {
            return Err(invalid("resamples", "at least 2 are required"));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(invalid("confidence", "must lie in (0, 1)"));
        }
        if self.resample_size == Some(0) {
            return Err(invalid("resample_size", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveBand {
    pub estimate: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub aggregate: CurveBand,
    /// One band per regime bin, low bin first.
    pub bins: Vec<CurveBand>,
    /// Resamples that had to be redrawn because a regime bin came out empty.
    pub redraws: usize,
    pub resamples: usize,
}

const MAX_REDRAWS: usize = 100;

fn resample_seed(seed: u64, r: usize) -> u64 {
    seed.wrapping_add((r as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Draws window-index resamples with replacement. Each resample has its own
/// derived seed; a resample that empties a regime bin is redrawn (up to 100
/// times) from the same stream.
pub fn draw_resamples(
    n_windows: usize,
    assignment: &RegimeAssignment,
    cfg: &BootstrapConfig,
) -> Result<(Vec<Vec<usize>>, usize)> {
    cfg.validate()?;
    let size = cfg.resample_size.unwrap_or(n_windows);
    let mut redraws = 0;
    let mut out = Vec::with_capacity(cfg.resamples);
    let mut seen = vec![false; assignment.n_bins];
    for r in 0..cfg.resamples {
        let mut rng = rng::stream(resample_seed(cfg.seed, r), rng::Stream::Bootstrap);
        let mut attempt = 0;
        loop {
            let idx: Vec<usize> = (0..size).map(|_| rng::index(&mut rng, n_windows)).collect();
            seen.iter_mut().for_each(|s| *s = false);
            for &w in &idx {
                seen[assignment.labels[w]] = true;
            }
            if let Some(b) = seen.iter().position(|s| !s) {
                attempt += 1;
                redraws += 1;
                if attempt > MAX_REDRAWS {
                    return Err(Error::EmptyBin { bin: b });
                }
                continue;
            }
            out.push(idx);
            break;
        }
    }
    Ok((out, redraws))
}

fn band_from_draws(estimate: Vec<f64>, draws: &[Vec<f64>], confidence: f64) -> CurveBand {
    let g = estimate.len();
    let lo_pct = 50.0 * (1.0 - confidence);
    let hi_pct = 50.0 * (1.0 + confidence);
    let mut lower = vec![0.0; g];
    let mut upper = vec![0.0; g];
    let mut column = vec![0.0; draws.len()];
    for k in 0..g {
        for (c, d) in column.iter_mut().zip(draws) {
            *c = d[k];
        }
        column.sort_by(f64::total_cmp);
        lower[k] = stats::percentile_sorted(&column, lo_pct);
        upper[k] = stats::percentile_sorted(&column, hi_pct);
    }
    CurveBand { estimate, lower, upper }
}

/// Percentile bands from explicit resamples of a precomputed delta matrix.
/// Regime labels travel with the resampled windows.
pub fn bootstrap_from_resamples(
    d: &DeltaMatrix,
    assignment: &RegimeAssignment,
    resamples: &[Vec<usize>],
    confidence: f64,
) -> Result<BootstrapResult> {
    if resamples.len() < 2 {
        return Err(invalid("resamples", "at least 2 are required"));
    }
    let n_bins = assignment.n_bins;
    let mut agg_draws = Vec::with_capacity(resamples.len());
    let mut bin_draws = vec![Vec::with_capacity(resamples.len()); n_bins];
    for idx in resamples {
        agg_draws.push(d.mean_over(idx));
        let labels: Vec<usize> = idx.iter().map(|&w| assignment.labels[w]).collect();
        let sub = DeltaMatrix {
            n_grid: d.n_grid,
            n_windows: idx.len(),
            values: (0..d.n_grid).flat_map(|g| idx.iter().map(move |&w| d.row(g)[w])).collect(),
        };
        for (b, curve) in sub.bin_means(&labels, n_bins)?.into_iter().enumerate() {
            bin_draws[b].push(curve);
        }
    }
    let full_bins = d.bin_means(&assignment.labels, n_bins)?;
    Ok(BootstrapResult {
        aggregate: band_from_draws(d.mean_all(), &agg_draws, confidence),
        bins: full_bins
            .into_iter()
            .zip(&bin_draws)
            .map(|(est, draws)| band_from_draws(est, draws, confidence))
            .collect(),
        redraws: 0,
        resamples: resamples.len(),
    })
}

/// Window-level bootstrap of the lag-aggregated regime-conditional curves.
pub fn bootstrap_ci(
    model: &AdditiveArModel,
    ws: &WindowSet,
    edge: (usize, usize),
    grid: &Grid,
    regimes: &RegimeSpec,
    cfg: &BootstrapConfig,
) -> Result<BootstrapResult> {
    cfg.validate()?;
    if ws.len() < 2 {
        return Err(invalid("windows", "bootstrap needs at least 2 windows"));
    }
    let d = ice::deltas(model, ws, edge, &grid.values, Intervention::AllLags)?;
    let assignment = regimes.assign(ws, edge.1)?;
    let (resamples, redraws) = draw_resamples(ws.len(), &assignment, cfg)?;
    let mut out = bootstrap_from_resamples(&d, &assignment, &resamples, cfg.confidence)?;
    out.redraws = redraws;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurveyConfig {
    pub score_threshold: f64,
    pub grid_points: usize,
    pub lo_pct: f64,
    pub hi_pct: f64,
    pub n_bins: usize,
    pub include_self: bool,
}

impl Default for SurveyConfig {
    fn default() -> Self {
        SurveyConfig {
            score_threshold: 0.005,
            grid_points: 81,
            lo_pct: 2.0,
            hi_pct: 98.0,
            n_bins: 3,
            include_self: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyRow {
    pub source: usize,
    pub target: usize,
    pub score: f64,
    pub flags: FunctionalFormFlags,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlagCounts {
    pub edges: usize,
    pub monotone: usize,
    pub threshold_activation: usize,
    pub saturating: usize,
    pub regime_reversal: usize,
    pub any_nonlinear: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyTable {
    pub rows: Vec<SurveyRow>,
    pub counts: FlagCounts,
}

/// Regime-conditional ICE and classification of every edge whose sd score
/// reaches `cfg.score_threshold`. Regimes are tertiles (or `n_bins`
/// equal-count bins) of the target's most recent lag.
pub fn heterogeneity_survey(model: &AdditiveArModel, panel: &PanelSeries, cfg: &SurveyConfig) -> Result<SurveyTable> {
    let ws = build_windows(panel, model.lag())?;
    let tensor = scores::contribution_tensor(model, &ws)?;
    let matrix = scores::scalar_scores(&tensor, ScoreMetric::Sd)?;
    let regimes = RegimeSpec { n_bins: cfg.n_bins, ..RegimeSpec::default() };
    let mut rows = Vec::new();
    let mut counts = FlagCounts::default();
    for (i, j, score) in matrix.edges_above(cfg.score_threshold, cfg.include_self) {
        let grid = ice::make_grid(panel, i, cfg.grid_points, cfg.lo_pct, cfg.hi_pct)?;
        let curve = ice::ice_regime_conditional(model, &ws, (i, j), &grid, &regimes, Intervention::AllLags)?;
        let flags = classify_curve(&curve)?;
        counts.edges += 1;
        counts.monotone += flags.monotone as usize;
        counts.threshold_activation += flags.threshold_activation as usize;
        counts.saturating += flags.saturating as usize;
        counts.regime_reversal += flags.regime_reversal as usize;
        counts.any_nonlinear += flags.any_nonlinear() as usize;
        rows.push(SurveyRow { source: i, target: j, score, flags });
    }
    Ok(SurveyTable { rows, counts })
}
