use std::time::Instant;

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Dataset, Loss, Mode, Network, NetworkConfig, OptimizerConfig, TaskKind};
use crate::error::{Result, UafError};
use crate::uaf::UafParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UafSnapshot {
    /// 0 is the initial value; `k` is the value after epoch `k`.
    pub epoch: usize,
    pub params: UafParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub task: TaskKind,
    /// `rmse` for regression, `accuracy` for classification.
    pub metric_name: String,
    /// Mean training loss of each epoch.
    pub loss_trace: Vec<f64>,
    /// Validation metric after each epoch.
    pub metric_trace: Vec<f64>,
    /// Validation macro F1 after each epoch (classification only).
    pub f1_trace: Option<Vec<f64>>,
    pub uaf_trajectory: Option<Vec<UafSnapshot>>,
    pub test_metric: f64,
    pub wall_time: f64,
    pub config: NetworkConfig,
}

impl TrainReport {
    pub fn final_metric(&self) -> f64 {
        *self.metric_trace.last().expect("at least one epoch")
    }

    pub fn final_uaf(&self) -> Option<UafParams> {
        self.uaf_trajectory
            .as_ref()
            .and_then(|t| t.last())
            .map(|s| s.params)
    }

    /// Equality on everything except wall time.
    pub fn same_run(&self, other: &TrainReport) -> bool {
        let mut a = self.clone();
        a.wall_time = other.wall_time;
        &a == other
    }

    /// One row per epoch: `epoch,loss,metric,A,B,C,D,E`. The parameter
    /// columns are empty for a frozen activation.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,loss,metric,A,B,C,D,E\n");
        for (i, (loss, metric)) in self.loss_trace.iter().zip(&self.metric_trace).enumerate() {
            out.push_str(&format!("{},{},{}", i + 1, loss, metric));
            match &self.uaf_trajectory {
                Some(t) => {
                    for v in t[i + 1].params.to_array() {
                        out.push_str(&format!(",{v}"));
                    }
                }
                None => out.push_str(",,,,,"),
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn loss_for(kind: TaskKind) -> Loss {
    match kind {
        TaskKind::Regression => Loss::MeanSquared,
        TaskKind::Classification => Loss::SoftmaxCrossEntropy,
    }
}

pub fn rmse(pred: &Array2<f64>, targets: ArrayView2<f64>) -> f64 {
    let d = pred - &targets;
    ((&d * &d).sum() / d.len() as f64).sqrt()
}

fn argmax(row: ndarray::ArrayView1<f64>) -> usize {
    let mut best = 0;
    for (i, v) in row.iter().enumerate() {
        if *v > row[best] {
            best = i;
        }
    }
    best
}

pub fn accuracy(pred: &Array2<f64>, targets: ArrayView2<f64>) -> f64 {
    let hits = pred
        .outer_iter()
        .zip(targets.outer_iter())
        .filter(|(p, t)| argmax(p.view()) == argmax(t.view()))
        .count();
    hits as f64 / pred.nrows() as f64
}

/// Unweighted mean of per-class F1; a class absent from both predictions
/// and labels is skipped.
pub fn macro_f1(pred: &Array2<f64>, targets: ArrayView2<f64>) -> f64 {
    let k = targets.ncols();
    let mut tp = vec![0usize; k];
    let mut fp = vec![0usize; k];
    let mut fn_ = vec![0usize; k];
    for (p, t) in pred.outer_iter().zip(targets.outer_iter()) {
        let (p, t) = (argmax(p), argmax(t));
        if p == t {
            tp[p] += 1;
        } else {
            fp[p] += 1;
            fn_[t] += 1;
        }
    }
    let scores: Vec<f64> = (0..k)
        .filter(|&c| tp[c] + fp[c] + fn_[c] > 0)
        .map(|c| 2.0 * tp[c] as f64 / (2 * tp[c] + fp[c] + fn_[c]) as f64)
        .collect();
    scores.iter().sum::<f64>() / scores.len().max(1) as f64
}

enum Optimizer {
    Sgd {
        lr: f64,
    },
    Adam {
        lr: f64,
        b1: f64,
        b2: f64,
        eps: f64,
        m: Vec<f64>,
        v: Vec<f64>,
        t: i32,
    },
}

impl Optimizer {
    fn new(cfg: &OptimizerConfig, n: usize) -> Self {
        match *cfg {
            OptimizerConfig::Sgd { lr } => Optimizer::Sgd { lr },
            OptimizerConfig::Adam {
                lr,
                beta1,
                beta2,
                eps,
            } => Optimizer::Adam {
                lr,
                b1: beta1,
                b2: beta2,
                eps,
                m: vec![0.0; n],
                v: vec![0.0; n],
                t: 0,
            },
        }
    }

    /// `scale[i]` multiplies the learning rate of parameter `i`.
    fn step(&mut self, params: &mut [f64], grad: &[f64], scale: impl Fn(usize) -> f64) {
        match self {
            Optimizer::Sgd { lr } => {
                for (i, (p, g)) in params.iter_mut().zip(grad).enumerate() {
                    *p -= *lr * scale(i) * g;
                }
            }
            Optimizer::Adam {
                lr,
                b1,
                b2,
                eps,
                m,
                v,
                t,
            } => {
                *t += 1;
                let c1 = 1.0 - b1.powi(*t);
                let c2 = 1.0 - b2.powi(*t);
                for i in 0..params.len() {
                    m[i] = *b1 * m[i] + (1.0 - *b1) * grad[i];
                    v[i] = *b2 * v[i] + (1.0 - *b2) * grad[i] * grad[i];
                    let mhat = m[i] / c1;
                    let vhat = v[i] / c2;
                    params[i] -= *lr * scale(i) * mhat / (vhat.sqrt() + *eps);
                }
            }
        }
    }
}

fn evaluate(
    net: &Network,
    inputs: ArrayView2<f64>,
    targets: ArrayView2<f64>,
    kind: TaskKind,
) -> Result<(f64, Option<f64>)> {
    let pred = net.predict(inputs)?;
    Ok(match kind {
        TaskKind::Regression => (rmse(&pred, targets), None),
        TaskKind::Classification => (accuracy(&pred, targets), Some(macro_f1(&pred, targets))),
    })
}

/// Trains a fresh network and returns the report with the trained network.
pub fn train_network(config: &NetworkConfig, data: &Dataset) -> Result<(TrainReport, Network)> {
    config.validate()?;
    data.validate()?;
    let sizes = &config.layer_sizes;
    if sizes[0] != data.n_features() || *sizes.last().unwrap() != data.n_outputs() {
        return Err(UafError::ShapeMismatch {
            expected: format!("{} inputs and {} outputs", sizes[0], sizes.last().unwrap()),
            got: format!(
                "{} features and {} targets",
                data.n_features(),
                data.n_outputs()
            ),
        });
    }
    let start = Instant::now();
    let mut net = Network::new(config)?;
    // separate stream from weight init
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed_5eed_5eed_5eed);
    let loss = loss_for(data.kind);
    let (train_x, train_t) = data.train();
    let (val_x, val_t) = {
        let (x, t) = data.validation();
        if x.nrows() == 0 {
            data.train()
        } else {
            (x, t)
        }
    };
    let mut flat = net.flat_params();
    let n_params = flat.len();
    let uaf_start = n_params - net.uaf_param_count();
    let mut opt = Optimizer::new(&config.optimizer, n_params);
    let uaf_scale = config.uaf_lr_scale;
    let scale = |i: usize| if i >= uaf_start { uaf_scale } else { 1.0 };

    let mut order: Vec<usize> = (0..train_x.nrows()).collect();
    let mut loss_trace = Vec::with_capacity(config.epochs);
    let mut metric_trace = Vec::with_capacity(config.epochs);
    let mut f1_trace = Vec::new();
    let mut trajectory = net.uaf.map(|p| {
        vec![UafSnapshot {
            epoch: 0,
            params: p,
        }]
    });

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let bx = train_x.select(Axis(0), chunk);
            let bt = train_t.select(Axis(0), chunk);
            let pass = net.forward(bx.view(), Mode::Train)?;
            let (value, grads) = net.backward(&pass, bt.view(), loss)?;
            if !value.is_finite() {
                return Err(UafError::Diverged { epoch });
            }
            net.update_running_stats(&pass);
            total += value * chunk.len() as f64;
            opt.step(&mut flat, &grads.flatten(), scale);
            if flat.iter().any(|v| !v.is_finite()) {
                return Err(UafError::Diverged { epoch });
            }
            net.set_flat_params(&flat);
        }
        loss_trace.push(total / train_x.nrows() as f64);
        let (metric, f1) = evaluate(&net, val_x, val_t, data.kind)?;
        if !metric.is_finite() {
            return Err(UafError::Diverged { epoch });
        }
        metric_trace.push(metric);
        if let Some(f) = f1 {
            f1_trace.push(f);
        }
        if let (Some(t), Some(p)) = (trajectory.as_mut(), net.uaf) {
            t.push(UafSnapshot { epoch, params: p });
        }
    }

    let (test_x, test_t) = data.test();
    let test_metric = if test_x.nrows() > 0 {
        evaluate(&net, test_x, test_t, data.kind)?.0
    } else {
        f64::NAN
    };
    let report = TrainReport {
        task: data.kind,
        metric_name: match data.kind {
            TaskKind::Regression => "rmse".into(),
            TaskKind::Classification => "accuracy".into(),
        },
        loss_trace,
        metric_trace,
        f1_trace: (data.kind == TaskKind::Classification).then_some(f1_trace),
        uaf_trajectory: trajectory,
        test_metric,
        wall_time: start.elapsed().as_secs_f64(),
        config: config.clone(),
    };
    Ok((report, net))
}

pub fn train(config: &NetworkConfig, data: &Dataset) -> Result<TrainReport> {
    train_network(config, data).map(|(r, _)| r)
}
