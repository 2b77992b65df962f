//! Three-variable synthetic system with a single causal edge X -> Y.
//!
//! ```text
//! X_t = ar_x * X_{t-1} + e^X_t + J_t
//! Y_t = ar_y * Y_{t-1} + g(X_{t-1}) + e^Y_t
//! Z_t = ar_z * Z_{t-1} + e^Z_t
//! ```
//!
//! with `e ~ N(0, sigma^2)` i.i.d., `J_t = +/-jump_magnitude` with
//! probability `p/2` each and 0 otherwise, and all states starting at 0.
//! The output is standardized column-wise.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::mechanism::MechanismSpec;
use crate::panel::PanelSeries;
use crate::rng::{self, Stream, StreamRng};

pub const VAR_NAMES: [&str; 3] = ["X", "Y", "Z"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DgpConfig {
    pub length: usize,
    pub noise_sigma: f64,
    pub jump_prob: f64,
    pub jump_magnitude: f64,
    pub ar_x: f64,
    pub ar_y: f64,
    pub ar_z: f64,
    pub seed: u64,
}

impl Default for DgpConfig {
    fn default() -> Self {
        DgpConfig {
            length: 2000,
            noise_sigma: 0.5,
            jump_prob: 0.15,
            jump_magnitude: 1.5,
            ar_x: 0.6,
            ar_y: 0.3,
            ar_z: 0.6,
            seed: 1000,
        }
    }
}

impl DgpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.length < 2 {
            return Err(invalid("length", "must be at least 2"));
        }
        if !(self.noise_sigma > 0.0) || !self.noise_sigma.is_finite() {
            return Err(invalid("noise_sigma", "must be a finite value > 0"));
        }
        if !(0.0..=1.0).contains(&self.jump_prob) {
            return Err(invalid("jump_prob", "must lie in [0, 1]"));
        }
        for (name, v) in [
            ("jump_magnitude", self.jump_magnitude),
            ("ar_x", self.ar_x),
            ("ar_y", self.ar_y),
            ("ar_z", self.ar_z),
        ] {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        Ok(())
    }
}

/// Source of the random innovations driving the system.
pub trait Innovations {
    /// Noise draws `(e^X, e^Y, e^Z)` for one step.
    fn noise(&mut self) -> [f64; 3];
    /// Jump term `J_t` for one step.
    fn jump(&mut self) -> f64;
}

/// Seeded Gaussian noise and symmetric jumps, each on its own stream.
pub struct SeededInnovations {
    noise: StreamRng,
    jumps: StreamRng,
    sigma: f64,
    p: f64,
    magnitude: f64,
}

impl SeededInnovations {
    pub fn new(cfg: &DgpConfig) -> Self {
        SeededInnovations {
            noise: rng::stream(cfg.seed, Stream::DgpNoise),
            jumps: rng::stream(cfg.seed, Stream::DgpJump),
            sigma: cfg.noise_sigma,
            p: cfg.jump_prob,
            magnitude: cfg.jump_magnitude,
        }
    }
}

impl Innovations for SeededInnovations {
    fn noise(&mut self) -> [f64; 3] {
        let mut draw = || {
            let z: f64 = StandardNormal.sample(&mut self.noise);
            self.sigma * z
        };
        [draw(), draw(), draw()]
    }

    fn jump(&mut self) -> f64 {
        let u = rng::unit_f64(&mut self.jumps);
        if u < 0.5 * self.p {
            self.magnitude
        } else if u < self.p {
            -self.magnitude
        } else {
            0.0
        }
    }
}

/// Raw (unstandardized) simulation. Returns rows `[X, Y, Z]` for
/// `t = 1..=length` and the jump sequence (`J_1 = 0`).
pub fn simulate(
    spec: &MechanismSpec,
    cfg: &DgpConfig,
    innov: &mut impl Innovations,
) -> Result<(Vec<[f64; 3]>, Vec<f64>)> {
    let mut rows = Vec::with_capacity(cfg.length);
    let mut jumps = Vec::with_capacity(cfg.length);
    rows.push([0.0; 3]);
    jumps.push(0.0);
    for t in 1..cfg.length {
        let [ex, ey, ez] = innov.noise();
        let j = innov.jump();
        let [x, y, z] = rows[t - 1];
        let next = [
            cfg.ar_x * x + ex + j,
            cfg.ar_y * y + spec.eval(x) + ey,
            cfg.ar_z * z + ez,
        ];
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(alloc::format!("simulated state at t = {}", t + 1)));
        }
        rows.push(next);
        jumps.push(j);
    }
    Ok((rows, jumps))
}

fn rows_to_panel(rows: &[[f64; 3]]) -> Result<PanelSeries> {
    PanelSeries::new(
        vec!["0".to_string()],
        VAR_NAMES.iter().map(|s| s.to_string()).collect(),
        (1..=rows.len() as i64).collect(),
        rows.iter().flatten().copied().collect(),
    )
}

/// Raw single-unit panel from a given innovation source.
pub fn generate_raw(
    spec: &MechanismSpec,
    cfg: &DgpConfig,
    innov: &mut impl Innovations,
) -> Result<PanelSeries> {
    spec.validate()?;
    cfg.validate()?;
    let (rows, _) = simulate(spec, cfg, innov)?;
    rows_to_panel(&rows)
}

/// Seeded, standardized single-unit panel with variables `X, Y, Z`.
pub fn generate_system(spec: &MechanismSpec, cfg: &DgpConfig) -> Result<PanelSeries> {
    let raw = generate_raw(spec, cfg, &mut SeededInnovations::new(cfg))?;
    raw.standardize()
}
