//! Contribution tensors, scalar edge scores, and the binned law-of-total-
//! variance diagnostic.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::AdditiveArModel;
use crate::stats;
use crate::window::{WindowOrigin, WindowSet};

/// `contrib[i][j][t]` for every window `t`, stored source-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ContributionTensor {
    n_vars: usize,
    values: Vec<f64>,
    origins: Vec<WindowOrigin>,
}

impl ContributionTensor {
    pub fn from_values(n_vars: usize, values: Vec<f64>, origins: Vec<WindowOrigin>) -> Result<Self> {
        if values.len() != n_vars * n_vars * origins.len() {
            return Err(Error::Shape("tensor size must be N x N x W".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("contribution tensor entry".into()));
        }
        Ok(ContributionTensor { n_vars, values, origins })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_windows(&self) -> usize {
        self.origins.len()
    }

    pub fn origins(&self) -> &[WindowOrigin] {
        &self.origins
    }

    /// The contribution series of edge `source -> target`.
    pub fn series(&self, source: usize, target: usize) -> &[f64] {
        let w = self.n_windows();
        let e = source * self.n_vars + target;
        &self.values[e * w..(e + 1) * w]
    }

    pub fn get(&self, source: usize, target: usize, window: usize) -> f64 {
        self.series(source, target)[window]
    }
}

/// Evaluation-mode contributions of every network on every window.
pub fn contribution_tensor(model: &AdditiveArModel, ws: &WindowSet) -> Result<ContributionTensor> {
    if model.n_vars() != ws.n_vars() || model.lag() != ws.lag() {
        return Err(Error::Shape("model and windows disagree on dimensions".into()));
    }
    model.check_stats(ws.stats())?;
    let (n, w) = (model.n_vars(), ws.len());
    let mut values = vec![0.0; n * n * w];
    let mut c = vec![0.0; n * n];
    for t in 0..w {
        model.contributions_into(ws.inputs(t), &mut c);
        for e in 0..n * n {
            values[e * w + t] = c[e];
        }
    }
    ContributionTensor::from_values(n, values, ws.origins().to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMetric {
    /// Population standard deviation of the contribution series.
    Sd,
    Var,
    MeanAbs,
    MaxAbs,
}

impl ScoreMetric {
    pub fn name(self) -> &'static str {
        match self {
            ScoreMetric::Sd => "sd",
            ScoreMetric::Var => "var",
            ScoreMetric::MeanAbs => "mean_abs",
            ScoreMetric::MaxAbs => "max_abs",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sd" => Some(ScoreMetric::Sd),
            "var" => Some(ScoreMetric::Var),
            "mean_abs" => Some(ScoreMetric::MeanAbs),
            "max_abs" => Some(ScoreMetric::MaxAbs),
            _ => None,
        }
    }

    pub fn of(self, series: &[f64]) -> f64 {
        match self {
            ScoreMetric::Sd => stats::pop_std(series),
            ScoreMetric::Var => stats::pop_variance(series),
            ScoreMetric::MeanAbs => series.iter().map(|v| v.abs()).sum::<f64>() / series.len() as f64,
            ScoreMetric::MaxAbs => stats::max_abs(series),
        }
    }
}

/// `scores[i * n + j]` is the score of edge `i -> j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalScoreMatrix {
    pub n_vars: usize,
    pub metric: ScoreMetric,
    pub scores: Vec<f64>,
}

impl CausalScoreMatrix {
    pub fn get(&self, source: usize, target: usize) -> f64 {
        self.scores[source * self.n_vars + target]
    }

    /// Edges `(source, target, score)` with score at or above `threshold`.
    pub fn edges_above(&self, threshold: f64, include_self: bool) -> Vec<(usize, usize, f64)> {
        let n = self.n_vars;
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| include_self || i != j)
            .map(|(i, j)| (i, j, self.get(i, j)))
            .filter(|&(_, _, s)| s >= threshold)
            .collect()
    }
}

pub fn scalar_scores(tensor: &ContributionTensor, metric: ScoreMetric) -> Result<CausalScoreMatrix> {
    let w = tensor.n_windows();
    let needs = match metric {
        ScoreMetric::Sd | ScoreMetric::Var => 2,
        _ => 1,
    };
    if w < needs {
        return Err(invalid("windows", alloc::format!("metric `{}` needs at least {needs}", metric.name())));
    }
    let n = tensor.n_vars();
    let scores = (0..n * n).map(|e| metric.of(tensor.series(e / n, e % n))).collect();
    Ok(CausalScoreMatrix { n_vars: n, metric, scores })
}

/// Binned law-of-total-variance split of one edge's contribution series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceDecomposition {
    pub total_var: f64,
    pub within_var: f64,
    pub between_var: f64,
    /// Squared scalar score (population variance of the series).
    pub score_sq: f64,
}

/// Splits the variance of `contrib_ij` into between- and within-bin parts,
/// with equal-count bins formed on the conditioning values (normally the
/// most recent lag of the source).
pub fn variance_decomposition(
    tensor: &ContributionTensor,
    conditioning: &[f64],
    edge: (usize, usize),
    n_bins: usize,
) -> Result<VarianceDecomposition> {
    let (i, j) = edge;
    if i >= tensor.n_vars() || j >= tensor.n_vars() {
        return Err(Error::OutOfRange(alloc::format!("edge {i} -> {j}")));
    }
    if n_bins < 2 {
        return Err(invalid("n_bins", "must be at least 2"));
    }
    let series = tensor.series(i, j);
    if conditioning.len() != series.len() {
        return Err(Error::Shape("one conditioning value per window is required".into()));
    }
    let labels = stats::equal_count_bins(conditioning, n_bins)?;
    decompose(series, &labels, n_bins)
}

pub(crate) fn decompose(series: &[f64], labels: &[usize], n_bins: usize) -> Result<VarianceDecomposition> {
    let w = series.len() as f64;
    let mut sums = vec![0.0; n_bins];
    let mut counts = vec![0usize; n_bins];
    for (&v, &b) in series.iter().zip(labels) {
        sums[b] += v;
        counts[b] += 1;
    }
    if let Some(b) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyBin { bin: b });
    }
    let means: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    let grand = stats::mean(series);
    let mut within = vec![0.0; n_bins];
    for (&v, &b) in series.iter().zip(labels) {
        within[b] += (v - means[b]) * (v - means[b]);
    }
    let within_var = within.iter().sum::<f64>() / w;
    let between_var = means
        .iter()
        .zip(&counts)
        .map(|(m, &c)| c as f64 * (m - grand) * (m - grand))
        .sum::<f64>()
        / w;
    let total = stats::pop_variance(series);
    Ok(VarianceDecomposition { total_var: total, within_var, between_var, score_sq: total })
}
