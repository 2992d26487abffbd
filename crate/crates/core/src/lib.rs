//! Universal activation function toolkit.
//!
//! * [`uaf`]: evaluation, gradients and presets of the five-parameter UAF
//! * [`targets`]: exact reference activations
//! * [`analysis`]: error extrema, interval RMSE, the preset summary table
//! * [`fitter`]: constrained gradient-descent fitting of UAF parameters
//! * [`network`]: a small dense network with a shared trainable UAF
//! * [`cli`]: the `uafkit` command line

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod fitter;
pub mod network;
pub mod targets;
pub mod uaf;

pub use analysis::{
    characteristic_residual, critical_points, error_report, interval_rmse, rmse_table,
    CriticalPoint, ErrorReport, Interval, RmseRow, RmseTable,
};
pub use error::{Result, UafError};
pub use targets::{approx_error, target_eval, TargetActivation};
pub use uaf::{
    eval_batch, eval_naive, eval_stable, grad, preset, PresetKind, UafGradient, UafParams,
};
