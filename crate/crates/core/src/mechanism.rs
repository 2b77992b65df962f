//! The four synthetic causal mechanisms for the X -> Y edge.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MechanismKind {
    Linear,
    Threshold,
    Saturating,
    SignChanging,
}

impl MechanismKind {
    pub const ALL: [MechanismKind; 4] = [
        MechanismKind::Linear,
        MechanismKind::Threshold,
        MechanismKind::Saturating,
        MechanismKind::SignChanging,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MechanismKind::Linear => "linear",
            MechanismKind::Threshold => "threshold",
            MechanismKind::Saturating => "saturating",
            MechanismKind::SignChanging => "sign_changing",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "linear" => Some(MechanismKind::Linear),
            "threshold" => Some(MechanismKind::Threshold),
            "saturating" => Some(MechanismKind::Saturating),
            "sign_changing" | "sign-changing" => Some(MechanismKind::SignChanging),
            _ => None,
        }
    }
}

/// A mechanism `g` together with its parameters.
///
/// `threshold_c` is used by the threshold and sign-changing forms,
/// `amplitude_a` by the threshold form, and the clip bounds by the linear and
/// saturating forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanismSpec {
    pub kind: MechanismKind,
    pub threshold_c: f64,
    pub amplitude_a: f64,
    pub clip_lo: f64,
    pub clip_hi: f64,
}

impl MechanismSpec {
    /// Default parameters for a mechanism family.
    pub fn new(kind: MechanismKind) -> Self {
        let (clip_lo, clip_hi) = match kind {
            MechanismKind::Saturating => (-1.0, 1.0),
            _ => (-1.2, 1.2),
        };
        MechanismSpec { kind, threshold_c: 0.6, amplitude_a: 1.6, clip_lo, clip_hi }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold_c > 0.0) {
            return Err(invalid("threshold_c", "must be > 0"));
        }
        if !(self.amplitude_a > 0.0) {
            return Err(invalid("amplitude_a", "must be > 0"));
        }
        if !(self.clip_lo < self.clip_hi) {
            return Err(invalid("clip_lo", "must be < clip_hi"));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            MechanismKind::Linear | MechanismKind::Saturating => x.clamp(self.clip_lo, self.clip_hi),
            MechanismKind::Threshold => {
                if x.abs() > self.threshold_c {
                    self.amplitude_a * x.signum()
                } else {
                    0.0
                }
            }
            MechanismKind::SignChanging => {
                if x.abs() < self.threshold_c {
                    -x
                } else {
                    x
                }
            }
        }
    }
}

/// Free-function form of [`MechanismSpec::eval`].
pub fn eval_mechanism(spec: &MechanismSpec, x: f64) -> f64 {
    spec.eval(x)
}
