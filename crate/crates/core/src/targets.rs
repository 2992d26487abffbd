//! Exact closed forms of the activations the UAF approximates.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::uaf::{logistic, softplus, PresetKind, UafParams};

/// Where a target fails to be smooth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Singularity {
    /// Value jumps (step).
    Jump,
    /// Value continuous, slope jumps (relu, leaky relu).
    Kink,
}

/// A reference activation. The gaussian entry is the `ln(2)`-scaled bell
/// `H(x) = ln(2)·exp(-x²/2)`, so that `H(0)` equals the UAF's value at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PresetKind", into = "PresetKind")]
pub struct TargetActivation {
    kind: PresetKind,
}

impl TryFrom<PresetKind> for TargetActivation {
    type Error = crate::error::UafError;

    fn try_from(kind: PresetKind) -> Result<Self> {
        TargetActivation::new(kind)
    }
}

impl From<TargetActivation> for PresetKind {
    fn from(t: TargetActivation) -> Self {
        t.kind
    }
}

impl TargetActivation {
    pub fn new(kind: PresetKind) -> Result<Self> {
        kind.validate()?;
        Ok(TargetActivation { kind })
    }

    pub fn kind(&self) -> PresetKind {
        self.kind
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            PresetKind::Identity => x,
            PresetKind::Step => {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    0.0
                } else {
                    0.5
                }
            }
            PresetKind::Sigmoid => logistic(x),
            PresetKind::Tanh => x.tanh(),
            PresetKind::Relu => x.max(0.0),
            PresetKind::LeakyRelu { alpha } => {
                if x >= 0.0 {
                    x
                } else {
                    alpha * x
                }
            }
            PresetKind::Softplus => softplus(x),
            PresetKind::Gaussian => std::f64::consts::LN_2 * (-0.5 * x * x).exp(),
        }
    }

    /// Derivative; at a kink this is the right-hand derivative, and the
    /// step's jump contributes nothing.
    pub fn derivative(&self, x: f64) -> f64 {
        match self.kind {
            PresetKind::Identity => 1.0,
            PresetKind::Step => 0.0,
            PresetKind::Sigmoid => {
                let s = logistic(x);
                s * (1.0 - s)
            }
            PresetKind::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
            PresetKind::Relu => {
                if x >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            PresetKind::LeakyRelu { alpha } => {
                if x >= 0.0 {
                    1.0
                } else {
                    alpha
                }
            }
            PresetKind::Softplus => logistic(x),
            PresetKind::Gaussian => -x * self.eval(x),
        }
    }

    /// Non-smooth point at `x = 0`, if any.
    pub fn singularity(&self) -> Option<Singularity> {
        match self.kind {
            PresetKind::Step => Some(Singularity::Jump),
            PresetKind::Relu | PresetKind::LeakyRelu { .. } => Some(Singularity::Kink),
            _ => None,
        }
    }

    /// One-sided limits of the target at its singular point.
    pub(crate) fn limits_at_zero(&self) -> (f64, f64) {
        match self.kind {
            PresetKind::Step => (0.0, 1.0),
            _ => (self.eval(0.0), self.eval(0.0)),
        }
    }
}

/// `f_uaf(x) - f_target(x)`.
pub fn approx_error(p: &UafParams, t: &TargetActivation, x: f64) -> f64 {
    p.eval(x) - t.eval(x)
}

pub fn target_eval(t: &TargetActivation, x: f64) -> f64 {
    t.eval(x)
}
