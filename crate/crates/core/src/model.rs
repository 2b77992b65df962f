//! Additive autoregressive model: one single-hidden-layer ReLU network per
//! (source, target) pair plus a bias per target,
//! `pred_j = beta_j + sum_i f_ij(lags of i)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::panel::ColumnStats;
use crate::rng::{self, Stream};
use crate::window::LagWindow;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Hyperparams {
    pub max_lag: usize,
    pub hidden_units: usize,
    pub dropout: f64,
    pub weight_decay: f64,
    pub sparsity_l1: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub val_split: f64,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            max_lag: 8,
            hidden_units: 32,
            dropout: 0.10,
            weight_decay: 3e-4,
            sparsity_l1: 0.15,
            learning_rate: 3e-4,
            batch_size: 128,
            epochs: 1000,
            val_split: 0.10,
            seed: 1000,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if self.max_lag == 0 {
            return Err(invalid("max_lag", "must be positive"));
        }
        if self.hidden_units == 0 {
            return Err(invalid("hidden_units", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(invalid("dropout", "must lie in [0, 1)"));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(invalid("weight_decay", "must be >= 0"));
        }
        if !(self.sparsity_l1 >= 0.0) {
            return Err(invalid("sparsity_l1", "must be >= 0"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(invalid("learning_rate", "must be > 0"));
        }
        if self.batch_size == 0 {
            return Err(invalid("batch_size", "must be positive"));
        }
        if self.epochs == 0 {
            return Err(invalid("epochs", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.val_split) {
            return Err(invalid("val_split", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Per-epoch loss trace recorded by the trainer.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    /// Mean training objective (MSE + l1 term) over the batches of each epoch.
    pub train_loss: Vec<f64>,
    /// Training-set MSE in evaluation mode after each epoch.
    pub train_mse: Vec<f64>,
    /// Validation MSE in evaluation mode after each epoch (empty without a
    /// validation split).
    pub val_mse: Vec<f64>,
}

/// Index arithmetic over the flat parameter vector.
///
/// Networks are stored source-major (`net = i * n + j`); each one holds
/// `w1` (hidden x lag, row-major), `b1` (hidden), `w2` (hidden) and `b2`,
/// in that order. Target biases follow all networks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub n_vars: usize,
    pub lag: usize,
    pub hidden: usize,
}

impl Layout {
    #[inline]
    pub fn net_size(&self) -> usize {
        self.hidden * self.lag + 2 * self.hidden + 1
    }

    #[inline]
    pub fn net_offset(&self, source: usize, target: usize) -> usize {
        (source * self.n_vars + target) * self.net_size()
    }

    #[inline]
    pub fn bias_offset(&self) -> usize {
        self.n_vars * self.n_vars * self.net_size()
    }

    pub fn n_params(&self) -> usize {
        self.bias_offset() + self.n_vars
    }

    /// True for entries that are network weights (`w1`, `w2`) rather than
    /// biases; weight decay applies to these only.
    pub fn is_weight(&self, p: usize) -> bool {
        if p >= self.bias_offset() {
            return false;
        }
        let r = p % self.net_size();
        let hk = self.hidden * self.lag;
        r < hk || (hk + self.hidden..hk + 2 * self.hidden).contains(&r)
    }
}

/// Borrowed view of one contribution network.
#[derive(Debug, Clone, Copy)]
pub struct NetView<'a> {
    pub w1: &'a [f64],
    pub b1: &'a [f64],
    pub w2: &'a [f64],
    pub b2: f64,
}

impl NetView<'_> {
    #[inline]
    pub fn eval(&self, lags: &[f64]) -> f64 {
        let k = lags.len();
        let mut out = self.b2;
        for h in 0..self.b1.len() {
            let row = &self.w1[h * k..(h + 1) * k];
            let mut z = self.b1[h];
            for l in 0..k {
                z += row[l] * lags[l];
            }
            if z > 0.0 {
                out += self.w2[h] * z;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditiveArModel {
    layout: Layout,
    params: Vec<f64>,
    stats: Option<Vec<ColumnStats>>,
    hyperparams: Option<Hyperparams>,
    history: Option<TrainHistory>,
}

impl AdditiveArModel {
    /// A model with every parameter set to zero.
    pub fn zeros(n_vars: usize, lag: usize, hidden: usize) -> Self {
        let layout = Layout { n_vars, lag, hidden };
        AdditiveArModel {
            layout,
            params: vec![0.0; layout.n_params()],
            stats: None,
            hyperparams: None,
            history: None,
        }
    }

    /// Uniform initialisation in `+/- 1/sqrt(fan_in)` per layer, target
    /// biases at zero.
    pub fn init_random(n_vars: usize, lag: usize, hidden: usize, seed: u64) -> Self {
        let mut m = Self::zeros(n_vars, lag, hidden);
        let mut rng = rng::stream(seed, Stream::Init);
        let l = m.layout;
        let b_in = 1.0 / libm::sqrt(lag as f64);
        let b_out = 1.0 / libm::sqrt(hidden as f64);
        let hk = hidden * lag;
        for net in 0..n_vars * n_vars {
            let base = net * l.net_size();
            for r in 0..l.net_size() {
                let bound = if r < hk + hidden { b_in } else { b_out };
                m.params[base + r] = bound * (2.0 * rng::unit_f64(&mut rng) - 1.0);
            }
        }
        m
    }

    pub fn from_parts(
        layout: Layout,
        params: Vec<f64>,
        stats: Option<Vec<ColumnStats>>,
        hyperparams: Option<Hyperparams>,
        history: Option<TrainHistory>,
    ) -> Result<Self> {
        if params.len() != layout.n_params() {
            return Err(Error::Shape(format!(
                "{} parameters for a layout needing {}",
                params.len(),
                layout.n_params()
            )));
        }
        if let Some(s) = &stats {
            if s.len() != layout.n_vars {
                return Err(Error::Shape("stats length differs from variable count".into()));
            }
        }
        Ok(AdditiveArModel { layout, params, stats, hyperparams, history })
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn n_vars(&self) -> usize {
        self.layout.n_vars
    }

    pub fn lag(&self) -> usize {
        self.layout.lag
    }

    pub fn hidden(&self) -> usize {
        self.layout.hidden
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn stats(&self) -> Option<&[ColumnStats]> {
        self.stats.as_deref()
    }

    pub fn set_stats(&mut self, stats: Option<Vec<ColumnStats>>) {
        self.stats = stats;
    }

    pub fn hyperparams(&self) -> Option<&Hyperparams> {
        self.hyperparams.as_ref()
    }

    pub fn history(&self) -> Option<&TrainHistory> {
        self.history.as_ref()
    }

    pub(crate) fn set_training_metadata(&mut self, hp: Hyperparams, history: TrainHistory) {
        self.hyperparams = Some(hp);
        self.history = Some(history);
    }

    pub fn bias(&self, target: usize) -> f64 {
        self.params[self.layout.bias_offset() + target]
    }

    pub fn set_bias(&mut self, target: usize, value: f64) {
        let o = self.layout.bias_offset();
        self.params[o + target] = value;
    }

    #[inline]
    pub fn net(&self, source: usize, target: usize) -> NetView<'_> {
        let l = self.layout;
        let p = &self.params[l.net_offset(source, target)..l.net_offset(source, target) + l.net_size()];
        let hk = l.hidden * l.lag;
        NetView {
            w1: &p[..hk],
            b1: &p[hk..hk + l.hidden],
            w2: &p[hk + l.hidden..hk + 2 * l.hidden],
            b2: p[hk + 2 * l.hidden],
        }
    }

    /// Mutable access to the raw parameter block of one network.
    pub fn net_params_mut(&mut self, source: usize, target: usize) -> &mut [f64] {
        let l = self.layout;
        let o = l.net_offset(source, target);
        &mut self.params[o..o + l.net_size()]
    }

    /// `f_ij` applied to a K-vector of lags of the source variable.
    #[inline]
    pub fn contribution(&self, source: usize, target: usize, lags: &[f64]) -> f64 {
        self.net(source, target).eval(lags)
    }

    /// Fills `out[i * n + j]` with `f_ij` for one window's input block.
    pub fn contributions_into(&self, inputs: &[f64], out: &mut [f64]) {
        let (n, k) = (self.n_vars(), self.lag());
        for i in 0..n {
            let lags = &inputs[i * k..(i + 1) * k];
            for j in 0..n {
                out[i * n + j] = self.contribution(i, j, lags);
            }
        }
    }

    /// `beta_j + sum_i c[i][j]`, summed in source order.
    #[inline]
    pub fn assemble(&self, target: usize, contrib: &[f64]) -> f64 {
        let n = self.n_vars();
        let mut p = self.bias(target);
        for i in 0..n {
            p += contrib[i * n + target];
        }
        p
    }

    /// Evaluation-mode prediction for one input block. Returns predictions
    /// (length N) and contributions (`N x N`, source-major).
    pub fn predict_inputs(&self, inputs: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let (n, k) = (self.n_vars(), self.lag());
        if inputs.len() != n * k {
            return Err(Error::Shape(format!(
                "window has {} inputs, model expects {} variables x {} lags",
                inputs.len(),
                n,
                k
            )));
        }
        let mut contrib = vec![0.0; n * n];
        self.contributions_into(inputs, &mut contrib);
        let preds = (0..n).map(|j| self.assemble(j, &contrib)).collect();
        Ok((preds, contrib))
    }

    pub fn predict(&self, window: &LagWindow) -> Result<(Vec<f64>, Vec<f64>)> {
        self.predict_inputs(&window.inputs)
    }

    /// Checks that data standardized with `stats` is compatible with this
    /// model's training statistics.
    pub fn check_stats(&self, stats: Option<&[ColumnStats]>) -> Result<()> {
        match (self.stats(), stats) {
            (Some(a), Some(b)) => {
                let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs()));
                if a.len() != b.len()
                    || a.iter().zip(b).any(|(p, q)| !close(p.mean, q.mean) || !close(p.std, q.std))
                {
                    return Err(Error::StatsMismatch);
                }
                Ok(())
            }
            (Some(_), None) => Err(Error::StatsMismatch),
            (None, _) => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(n: usize, k: usize, seed: u64) -> LagWindow {
        let mut r = rng::stream(seed, Stream::Bootstrap);
        LagWindow {
            unit: 0,
            time: k,
            inputs: (0..n * k).map(|_| 4.0 * rng::unit_f64(&mut r) - 2.0).collect(),
            target: vec![0.0; n],
        }
    }

    #[test]
    fn zero_network_predicts_bias() {
        let mut m = AdditiveArModel::zeros(3, 2, 4);
        for j in 0..3 {
            m.set_bias(j, 0.25 * j as f64 - 0.1);
        }
        let (p, c) = m.predict(&window(3, 2, 1)).unwrap();
        assert!(c.iter().all(|&v| v == 0.0));
        for j in 0..3 {
            assert_eq!(p[j], m.bias(j));
        }
    }

    #[test]
    fn linear_pass_through_network() {
        // f_ij(v) = w.v built from two ReLU units: relu(w.v) - relu(-w.v)
        let (n, k) = (2, 3);
        let mut m = AdditiveArModel::zeros(n, k, 2);
        let ws = [[0.5, -1.0, 2.0], [1.5, 0.25, -0.75], [-0.3, 0.3, 0.9], [0.0, 1.0, 0.0]];
        for i in 0..n {
            for j in 0..n {
                let w = ws[i * n + j];
                let p = m.net_params_mut(i, j);
                p[..3].copy_from_slice(&w);
                for l in 0..3 {
                    p[3 + l] = -w[l];
                }
                p[8] = 1.0; // w2[0]
                p[9] = -1.0; // w2[1]
            }
        }
        let win = window(n, k, 2);
        let (_, c) = m.predict(&win).unwrap();
        for i in 0..n {
            for j in 0..n {
                let w = ws[i * n + j];
                let direct: f64 = (0..k).map(|l| w[l] * win.inputs[i * k + l]).sum();
                assert!((c[i * n + j] - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn additivity_identity() {
        for seed in 0..20 {
            let mut m = AdditiveArModel::init_random(3, 2, 5, seed);
            for j in 0..3 {
                m.set_bias(j, seed as f64 * 0.1 - j as f64);
            }
            let (p, c) = m.predict(&window(3, 2, seed + 100)).unwrap();
            for j in 0..3 {
                let s: f64 = m.bias(j) + (0..3).map(|i| c[i * 3 + j]).sum::<f64>();
                assert!((p[j] - s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn contributions_depend_only_on_own_source() {
        let m = AdditiveArModel::init_random(3, 2, 6, 7);
        let w = window(3, 2, 8);
        let (_, c0) = m.predict(&w).unwrap();
        for moved in 0..3 {
            let mut w2 = w.clone();
            for l in 0..2 {
                w2.inputs[moved * 2 + l] += 1.3;
            }
            let (_, c1) = m.predict(&w2).unwrap();
            for i in (0..3).filter(|&i| i != moved) {
                for j in 0..3 {
                    assert_eq!(c0[i * 3 + j], c1[i * 3 + j]);
                }
            }
        }
    }

    #[test]
    fn shape_mismatch() {
        let m = AdditiveArModel::zeros(3, 2, 4);
        assert!(matches!(m.predict(&window(2, 2, 1)), Err(Error::Shape(_))));
    }

    #[test]
    fn weight_mask_covers_w1_and_w2() {
        let l = Layout { n_vars: 2, lag: 3, hidden: 4 };
        let weights = (0..l.n_params()).filter(|&p| l.is_weight(p)).count();
        assert_eq!(weights, 4 * (4 * 3 + 4));
        assert!(!l.is_weight(l.bias_offset()));
        assert!(!l.is_weight(12)); // first b1 entry
    }
}
