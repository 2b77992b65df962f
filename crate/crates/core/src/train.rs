//! Training objective, its analytic gradient, and the Adam training loop.
//!
//! For a batch of `B` windows the objective is
//!
//! ```text
//! L = 1/(B*N) * sum_b sum_j (pred_bj - y_bj)^2
//!   + l1 * sum_(i,j) 1/B * sum_b |f_ij(b)|
//!   + l2/2 * ||weights||^2
//! ```
//!
//! The l2 term is not fed through Adam: the trainer applies it as a separate
//! shrink step `w -= lr * l2 * w` after each Adam update (decoupled weight
//! decay), which is the same gradient contribution the term has in `L`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::model::{AdditiveArModel, Hyperparams, TrainHistory};
use crate::panel::PanelSeries;
use crate::rng::{self, Stream, StreamRng};
use crate::window::{build_windows, WindowSet};

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Parts of the objective on one batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchLoss {
    pub mse: f64,
    pub l1: f64,
}

impl BatchLoss {
    pub fn data_objective(&self) -> f64 {
        self.mse + self.l1
    }
}

struct Scratch {
    pre: Vec<f64>,
    scale: Vec<f64>,
    contrib: Vec<f64>,
    resid: Vec<f64>,
}

impl Scratch {
    fn new(n: usize, hidden: usize) -> Self {
        Scratch {
            pre: vec![0.0; n * n * hidden],
            scale: vec![1.0; n * n * hidden],
            contrib: vec![0.0; n * n],
            resid: vec![0.0; n],
        }
    }
}

/// Accumulates the gradient of the data objective (MSE + l1) over `batch`
/// into `grad` (which is not cleared) and returns the objective parts.
/// With `dropout = Some((rng, rate))` hidden activations are dropped with
/// inverted scaling.
fn accumulate(
    model: &AdditiveArModel,
    ws: &WindowSet,
    batch: &[usize],
    l1: f64,
    mut dropout: Option<(&mut StreamRng, f64)>,
    grad: &mut [f64],
    s: &mut Scratch,
) -> BatchLoss {
    let layout = model.layout();
    let (n, k, hd) = (layout.n_vars, layout.lag, layout.hidden);
    let hk = hd * k;
    let inv_b = 1.0 / batch.len() as f64;
    let mse_scale = 2.0 * inv_b / n as f64;
    let bias_off = layout.bias_offset();
    let params = model.params();
    let mut sq_sum = 0.0;
    let mut abs_sum = 0.0;

    for &w in batch {
        let inputs = ws.inputs(w);
        let targets = ws.targets(w);
        // forward
        for i in 0..n {
            let x = &inputs[i * k..(i + 1) * k];
            for j in 0..n {
                let net = i * n + j;
                let p = &params[layout.net_offset(i, j)..][..layout.net_size()];
                let pre = &mut s.pre[net * hd..(net + 1) * hd];
                let scale = &mut s.scale[net * hd..(net + 1) * hd];
                if let Some((rng, rate)) = dropout.as_mut() {
                    let keep = 1.0 / (1.0 - *rate);
                    for sc in scale.iter_mut() {
                        *sc = if rng::unit_f64(*rng) < *rate { 0.0 } else { keep };
                    }
                }
                let (w1, rest) = p.split_at(hk);
                let (b1, rest) = rest.split_at(hd);
                let w2 = &rest[..hd];
                let mut out = rest[hd];
                for ((((row, &b), &v), z_out), &sc) in
                    w1.chunks_exact(k).zip(b1).zip(w2).zip(pre.iter_mut()).zip(scale.iter())
                {
                    let z = row.iter().zip(x).fold(b, |acc, (&wt, &xi)| acc + wt * xi);
                    *z_out = z;
                    if z > 0.0 {
                        out += v * z * sc;
                    }
                }
                s.contrib[net] = out;
            }
        }
        for j in 0..n {
            let mut pred = params[bias_off + j];
            for i in 0..n {
                pred += s.contrib[i * n + j];
            }
            let r = pred - targets[j];
            s.resid[j] = r;
            sq_sum += r * r;
            grad[bias_off + j] += mse_scale * r;
        }
        // backward
        for i in 0..n {
            let x = &inputs[i * k..(i + 1) * k];
            for j in 0..n {
                let net = i * n + j;
                let c = s.contrib[net];
                abs_sum += c.abs();
                let sign = if c > 0.0 {
                    1.0
                } else if c < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                let g = mse_scale * s.resid[j] + l1 * inv_b * sign;
                let off = layout.net_offset(i, j);
                let w2 = &params[off + hk + hd..off + hk + 2 * hd];
                let gp = &mut grad[off..off + layout.net_size()];
                let (gw1, grest) = gp.split_at_mut(hk);
                let (gb1, grest) = grest.split_at_mut(hd);
                let (gw2, gb2) = grest.split_at_mut(hd);
                gb2[0] += g;
                let pre = &s.pre[net * hd..(net + 1) * hd];
                let scale = &s.scale[net * hd..(net + 1) * hd];
                for h in 0..hd {
                    let (z, sc) = (pre[h], scale[h]);
                    if z > 0.0 && sc != 0.0 {
                        gw2[h] += g * z * sc;
                        let dz = g * w2[h] * sc;
                        gb1[h] += dz;
                        for (gw, &xi) in gw1[h * k..(h + 1) * k].iter_mut().zip(x) {
                            *gw += dz * xi;
                        }
                    }
                }
            }
        }
    }
    BatchLoss { mse: sq_sum * inv_b / n as f64, l1: l1 * abs_sum * inv_b }
}

fn l2_penalty(model: &AdditiveArModel, l2: f64) -> f64 {
    let layout = model.layout();
    let sq: f64 = model
        .params()
        .iter()
        .enumerate()
        .filter(|(p, _)| layout.is_weight(*p))
        .map(|(_, v)| v * v)
        .sum();
    0.5 * l2 * sq
}

/// Full training objective on `batch` (dropout disabled) and its gradient
/// with respect to the flat parameter vector.
pub fn loss_and_gradient(
    model: &AdditiveArModel,
    ws: &WindowSet,
    batch: &[usize],
    hp: &Hyperparams,
) -> Result<(f64, Vec<f64>)> {
    check_shape(model, ws)?;
    if batch.is_empty() {
        return Err(invalid("batch", "must be nonempty"));
    }
    if let Some(&w) = batch.iter().find(|&&w| w >= ws.len()) {
        return Err(Error::OutOfRange(alloc::format!("window {w} of {}", ws.len())));
    }
    let mut grad = vec![0.0; model.params().len()];
    let mut s = Scratch::new(model.n_vars(), model.hidden());
    let parts = accumulate(model, ws, batch, hp.sparsity_l1, None, &mut grad, &mut s);
    let layout = model.layout();
    for (p, g) in grad.iter_mut().enumerate() {
        if layout.is_weight(p) {
            *g += hp.weight_decay * model.params()[p];
        }
    }
    Ok((parts.data_objective() + l2_penalty(model, hp.weight_decay), grad))
}

/// Objective parts on `batch` in evaluation mode, without the l2 term.
pub fn batch_loss(model: &AdditiveArModel, ws: &WindowSet, batch: &[usize], l1: f64) -> Result<BatchLoss> {
    check_shape(model, ws)?;
    let mut grad = vec![0.0; model.params().len()];
    let mut s = Scratch::new(model.n_vars(), model.hidden());
    Ok(accumulate(model, ws, batch, l1, None, &mut grad, &mut s))
}

/// Evaluation-mode mean squared error over the given windows.
pub fn mse(model: &AdditiveArModel, ws: &WindowSet, idx: &[usize]) -> f64 {
    let n = model.n_vars();
    let mut c = vec![0.0; n * n];
    let mut sum = 0.0;
    for &w in idx {
        model.contributions_into(ws.inputs(w), &mut c);
        for j in 0..n {
            let r = model.assemble(j, &c) - ws.targets(w)[j];
            sum += r * r;
        }
    }
    sum / (idx.len() * n) as f64
}

fn check_shape(model: &AdditiveArModel, ws: &WindowSet) -> Result<()> {
    if model.n_vars() != ws.n_vars() || model.lag() != ws.lag() {
        return Err(Error::Shape(alloc::format!(
            "model is {} variables x {} lags, windows are {} x {}",
            model.n_vars(),
            model.lag(),
            ws.n_vars(),
            ws.lag()
        )));
    }
    Ok(())
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(n: usize) -> Self {
        Adam { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - libm::pow(ADAM_BETA1, self.t as f64);
        let c2 = 1.0 - libm::pow(ADAM_BETA2, self.t as f64);
        for p in 0..params.len() {
            let g = grad[p];
            self.m[p] = ADAM_BETA1 * self.m[p] + (1.0 - ADAM_BETA1) * g;
            self.v[p] = ADAM_BETA2 * self.v[p] + (1.0 - ADAM_BETA2) * g * g;
            let mh = self.m[p] / c1;
            let vh = self.v[p] / c2;
            params[p] -= lr * mh / (libm::sqrt(vh) + ADAM_EPS);
        }
    }
}

/// Trains on a standardized panel with lag windows of length `hp.max_lag`.
pub fn train(panel: &PanelSeries, hp: &Hyperparams) -> Result<AdditiveArModel> {
    let ws = build_windows(panel, hp.max_lag)?;
    train_windows(&ws, hp)
}

/// Trains from a freshly initialised model on prebuilt windows.
pub fn train_windows(ws: &WindowSet, hp: &Hyperparams) -> Result<AdditiveArModel> {
    hp.validate()?;
    let model = AdditiveArModel::init_random(ws.n_vars(), hp.max_lag, hp.hidden_units, hp.seed);
    train_from(model, ws, hp)
}

/// Runs the training loop starting from `model`.
///
/// Each epoch reshuffles the training windows with the seeded shuffle stream
/// and takes one Adam step per batch. The final-epoch parameters are
/// returned; the validation windows (the chronologically last fraction of
/// every unit) are only scored.
pub fn train_from(mut model: AdditiveArModel, ws: &WindowSet, hp: &Hyperparams) -> Result<AdditiveArModel> {
    hp.validate()?;
    check_shape(&model, ws)?;
    if model.hidden() != hp.hidden_units {
        return Err(Error::Shape("model hidden width differs from hyperparameters".into()));
    }
    let (train_idx, val_idx) = ws.chronological_split(hp.val_split);
    if train_idx.is_empty() {
        return Err(invalid("val_split", "leaves no training windows"));
    }
    let layout = model.layout();
    let weight_mask: Vec<bool> = (0..layout.n_params()).map(|p| layout.is_weight(p)).collect();
    let mut shuffle_rng = rng::stream(hp.seed, Stream::Shuffle);
    let mut dropout_rng = rng::stream(hp.seed, Stream::Dropout);
    let mut adam = Adam::new(layout.n_params());
    let mut grad = vec![0.0; layout.n_params()];
    let mut scratch = Scratch::new(layout.n_vars, layout.hidden);
    let mut history = TrainHistory::default();
    let mut order = train_idx.clone();
    let decay = hp.learning_rate * hp.weight_decay;

    for epoch in 0..hp.epochs {
        order.copy_from_slice(&train_idx);
        rng::shuffle(&mut shuffle_rng, &mut order);
        let mut obj_sum = 0.0;
        let mut mse_sum = 0.0;
        let mut n_batches = 0;
        for (b, batch) in order.chunks(hp.batch_size).enumerate() {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let dropout = if hp.dropout > 0.0 { Some((&mut dropout_rng, hp.dropout)) } else { None };
            let parts = accumulate(&model, ws, batch, hp.sparsity_l1, dropout, &mut grad, &mut scratch);
            if !parts.data_objective().is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Diverged { epoch: epoch + 1, batch: b + 1 });
            }
            obj_sum += parts.data_objective();
            mse_sum += parts.mse;
            n_batches += 1;
            let params = model.params_mut();
            adam.step(params, &grad, hp.learning_rate);
            if decay > 0.0 {
                for (p, w) in params.iter_mut().enumerate() {
                    if weight_mask[p] {
                        *w -= decay * *w;
                    }
                }
            }
        }
        history.train_loss.push(obj_sum / n_batches as f64);
        history.train_mse.push(mse_sum / n_batches as f64);
        if !val_idx.is_empty() {
            history.val_mse.push(mse(&model, ws, &val_idx));
        }
    }
    model.set_stats(ws.stats().map(|s| s.to_vec()));
    model.set_training_metadata(*hp, history);
    Ok(model)
}
