//! Brute-force reference implementations used by the tests. They read the
//! flat parameter vector directly from its documented layout and recompute
//! everything from scratch, sharing no code with the library.
#![allow(dead_code)]

use funcausal_core::window::{self, WindowOrigin, WindowSet};
use funcausal_core::AdditiveArModel;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Flat layout: networks source-major (`i * n + j`), each `w1 (h x k, row
/// major), b1 (h), w2 (h), b2`, followed by one bias per target.
pub struct Shape {
    pub n: usize,
    pub k: usize,
    pub h: usize,
}

impl Shape {
    pub fn of(m: &AdditiveArModel) -> Self {
        Shape { n: m.n_vars(), k: m.lag(), h: m.hidden() }
    }

    pub fn net_len(&self) -> usize {
        self.h * self.k + 2 * self.h + 1
    }

    pub fn net_start(&self, i: usize, j: usize) -> usize {
        (i * self.n + j) * self.net_len()
    }

    pub fn bias_start(&self) -> usize {
        self.n * self.n * self.net_len()
    }

    pub fn is_weight(&self, p: usize) -> bool {
        if p >= self.bias_start() {
            return false;
        }
        let q = p % self.net_len();
        let hk = self.h * self.k;
        q < hk || (hk + self.h..hk + 2 * self.h).contains(&q)
    }
}

pub fn net_out(params: &[f64], s: &Shape, i: usize, j: usize, lags: &[f64]) -> f64 {
    let base = s.net_start(i, j);
    let hk = s.h * s.k;
    let mut out = params[base + hk + 2 * s.h];
    for u in 0..s.h {
        let mut z = params[base + hk + u];
        for l in 0..s.k {
            z += params[base + u * s.k + l] * lags[l];
        }
        out += params[base + hk + s.h + u] * z.max(0.0);
    }
    out
}

/// Predictions for every target from variable-major inputs.
pub fn predict(params: &[f64], s: &Shape, inputs: &[f64]) -> Vec<f64> {
    (0..s.n)
        .map(|j| {
            let mut p = params[s.bias_start() + j];
            for i in 0..s.n {
                p += net_out(params, s, i, j, &inputs[i * s.k..(i + 1) * s.k]);
            }
            p
        })
        .collect()
}

/// Per-window intervention deltas on the target for one grid value.
/// `lag = None` sets every lag of the source; `Some(l)` only lag `l`.
pub fn deltas_at(m: &AdditiveArModel, ws: &WindowSet, edge: (usize, usize), x: f64, lag: Option<usize>) -> Vec<f64> {
    let s = Shape::of(m);
    let (src, tgt) = edge;
    (0..ws.len())
        .map(|w| {
            let orig = ws.inputs(w).to_vec();
            let mut mod_in = orig.clone();
            match lag {
                None => (0..s.k).for_each(|l| mod_in[src * s.k + l] = x),
                Some(l) => mod_in[src * s.k + l - 1] = x,
            }
            predict(m.params(), &s, &mod_in)[tgt] - predict(m.params(), &s, &orig)[tgt]
        })
        .collect()
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn ice_curve(m: &AdditiveArModel, ws: &WindowSet, edge: (usize, usize), grid: &[f64], lag: Option<usize>) -> Vec<f64> {
    grid.iter().map(|&x| mean(&deltas_at(m, ws, edge, x, lag))).collect()
}

/// Equal-count bins by rank on (value, index).
pub fn rank_bins(values: &[f64], n_bins: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap().then(a.cmp(&b)));
    let mut labels = vec![0; values.len()];
    for (rank, &w) in order.iter().enumerate() {
        labels[w] = rank * n_bins / values.len();
    }
    labels
}

pub fn regime_curves(
    m: &AdditiveArModel,
    ws: &WindowSet,
    edge: (usize, usize),
    grid: &[f64],
    lag: Option<usize>,
    regime_var: usize,
    n_bins: usize,
) -> Vec<Vec<f64>> {
    let reg: Vec<f64> = (0..ws.len()).map(|w| ws.inputs(w)[regime_var * m.lag()]).collect();
    let labels = rank_bins(&reg, n_bins);
    let mut out = vec![vec![0.0; grid.len()]; n_bins];
    for (g, &x) in grid.iter().enumerate() {
        let d = deltas_at(m, ws, edge, x, lag);
        for b in 0..n_bins {
            let sel: Vec<f64> = d.iter().zip(&labels).filter(|(_, &l)| l == b).map(|(v, _)| *v).collect();
            out[b][g] = mean(&sel);
        }
    }
    out
}

/// Full training objective without dropout.
pub fn objective(params: &[f64], s: &Shape, ws: &WindowSet, batch: &[usize], l1: f64, l2: f64) -> f64 {
    let b = batch.len() as f64;
    let mut sq = 0.0;
    let mut abs = 0.0;
    for &w in batch {
        let inputs = ws.inputs(w);
        let pred = predict(params, s, inputs);
        for j in 0..s.n {
            sq += (pred[j] - ws.targets(w)[j]).powi(2);
            for i in 0..s.n {
                abs += net_out(params, s, i, j, &inputs[i * s.k..(i + 1) * s.k]).abs();
            }
        }
    }
    let wsq: f64 = params.iter().enumerate().filter(|(p, _)| s.is_weight(*p)).map(|(_, v)| v * v).sum();
    sq / (b * s.n as f64) + l1 * abs / b + 0.5 * l2 * wsq
}

/// A tiny model with every parameter drawn from U(-1, 1), so ReLUs are
/// active for some inputs and inactive for others.
pub fn random_model(n: usize, k: usize, h: usize, rng: &mut StdRng) -> AdditiveArModel {
    let mut m = AdditiveArModel::zeros(n, k, h);
    for p in m.params_mut() {
        *p = rng.gen_range(-1.0..1.0);
    }
    m
}

pub fn random_windows(n: usize, k: usize, count: usize, rng: &mut StdRng) -> WindowSet {
    let inputs = (0..count * n * k).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let targets = (0..count * n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let origins = (0..count).map(|t| WindowOrigin { unit: 0, time: t }).collect();
    window::from_parts(n, k, inputs, targets, origins, None).unwrap()
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Range of a sequence.
pub fn range(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min)
}
