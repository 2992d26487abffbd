//! A small dense network whose hidden layers share one activation.
//!
//! Each hidden layer computes `affine -> batch norm (optional) -> activation`.
//! The activation is either frozen (a UAF preset or an exact closed form) or
//! a single trainable UAF whose five parameters are shared by every neuron
//! of every layer and updated alongside the weights.
//!
//! Batch norm is the plain `(x - mean) / std` form with no learned scale or
//! shift. Training uses batch statistics; evaluation uses running averages.

mod dataset;
mod model;
mod train;

pub use dataset::{make_blobs, make_gas_analogue, make_linear, Dataset, Split, TaskKind};
pub use model::{BatchNormState, ForwardPass, Gradients, LayerCache, Loss, Mode, Network};
pub use train::{accuracy, macro_f1, rmse, train, train_network, TrainReport, UafSnapshot};

use serde::{Deserialize, Serialize};

use crate::error::{Result, UafError};
use crate::uaf::{PresetKind, UafParams};

/// How a frozen activation is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FixedForm {
    /// The UAF with the preset's parameters.
    #[default]
    Uaf,
    /// The exact closed-form target.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationConfig {
    Fixed {
        preset: PresetKind,
        #[serde(default)]
        form: FixedForm,
    },
    TrainableUaf {
        init: UafParams,
    },
}

impl ActivationConfig {
    pub fn is_trainable(&self) -> bool {
        matches!(self, ActivationConfig::TrainableUaf { .. })
    }
}

/// The output layer is linear either way; `none` is accepted as a synonym.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    #[default]
    Identity,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum OptimizerConfig {
    Sgd {
        lr: f64,
    },
    Adam {
        lr: f64,
        #[serde(default = "default_beta1")]
        beta1: f64,
        #[serde(default = "default_beta2")]
        beta2: f64,
        #[serde(default = "default_adam_eps")]
        eps: f64,
    },
}

fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_adam_eps() -> f64 {
    1e-8
}
fn default_one() -> f64 {
    1.0
}
fn default_bn_momentum() -> f64 {
    0.1
}
fn default_bn_epsilon() -> f64 {
    1e-5
}

impl OptimizerConfig {
    pub fn adam(lr: f64) -> Self {
        OptimizerConfig::Adam {
            lr,
            beta1: default_beta1(),
            beta2: default_beta2(),
            eps: default_adam_eps(),
        }
    }

    pub fn lr(&self) -> f64 {
        match *self {
            OptimizerConfig::Sgd { lr } | OptimizerConfig::Adam { lr, .. } => lr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Input width, hidden widths..., output width.
    pub layer_sizes: Vec<usize>,
    pub activation: ActivationConfig,
    /// One flag per hidden layer. Empty means no batch norm anywhere.
    #[serde(default)]
    pub use_batch_norm: Vec<bool>,
    #[serde(default)]
    pub output_activation: OutputActivation,
    #[serde(default)]
    pub seed: u64,
    pub optimizer: OptimizerConfig,
    pub batch_size: usize,
    pub epochs: usize,
    /// Multiplier on the learning rate for the shared UAF parameters.
    #[serde(default = "default_one")]
    pub uaf_lr_scale: f64,
    #[serde(default = "default_bn_momentum")]
    pub bn_momentum: f64,
    /// Lower bound on the batch-norm standard deviation.
    #[serde(default = "default_bn_epsilon")]
    pub bn_epsilon: f64,
}

impl NetworkConfig {
    /// Adam(1e-3), batch 32, batch norm on every hidden layer.
    pub fn new(layer_sizes: Vec<usize>, activation: ActivationConfig, epochs: usize) -> Self {
        let hidden = layer_sizes.len().saturating_sub(2);
        NetworkConfig {
            layer_sizes,
            activation,
            use_batch_norm: vec![true; hidden],
            output_activation: OutputActivation::Identity,
            seed: 0,
            optimizer: OptimizerConfig::adam(1e-3),
            batch_size: 32,
            epochs,
            uaf_lr_scale: 1.0,
            bn_momentum: default_bn_momentum(),
            bn_epsilon: default_bn_epsilon(),
        }
    }

    pub fn hidden_layers(&self) -> usize {
        self.layer_sizes.len().saturating_sub(2)
    }

    pub fn batch_norm_on(&self, layer: usize) -> bool {
        self.use_batch_norm.get(layer).copied().unwrap_or(false)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(UafError::InvalidConfig(m));
        if self.layer_sizes.len() < 3 {
            return bad("need input, at least one hidden, and output layer sizes".into());
        }
        if self.layer_sizes.contains(&0) {
            return bad("layer sizes must be positive".into());
        }
        if !self.use_batch_norm.is_empty() && self.use_batch_norm.len() != self.hidden_layers() {
            return bad(format!(
                "use_batch_norm has {} flags for {} hidden layers",
                self.use_batch_norm.len(),
                self.hidden_layers()
            ));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return bad("batch_size and epochs must be positive".into());
        }
        let lr = self.optimizer.lr();
        if !(lr > 0.0 && lr.is_finite()) {
            return bad(format!("learning rate must be positive, got {lr}"));
        }
        if let OptimizerConfig::Adam {
            beta1, beta2, eps, ..
        } = self.optimizer
        {
            if !((0.0..1.0).contains(&beta1) && (0.0..1.0).contains(&beta2) && eps > 0.0) {
                return bad("adam needs beta1, beta2 in [0, 1) and eps > 0".into());
            }
        }
        if !(self.uaf_lr_scale >= 0.0 && self.uaf_lr_scale.is_finite()) {
            return bad("uaf_lr_scale must be non-negative".into());
        }
        if !(self.bn_momentum > 0.0 && self.bn_momentum < 1.0) {
            return bad("bn_momentum must be in (0, 1)".into());
        }
        if !(self.bn_epsilon > 0.0) {
            return bad("bn_epsilon must be positive".into());
        }
        match self.activation {
            ActivationConfig::Fixed { preset, .. } => preset.validate()?,
            ActivationConfig::TrainableUaf { init } => init.validate()?,
        }
        Ok(())
    }
}
