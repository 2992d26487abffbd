//! Fitting UAF parameters to a target activation.
//!
//! The objective is the RMSE of the approximation error over an evenly
//! spaced grid. Descent is gradient descent with a diagonal Gauss-Newton
//! metric: each free parameter's gradient is divided by that parameter's
//! mean squared sensitivity, which puts all five parameters on a common
//! scale. A trial step that raises the RMSE is reverted and the step is
//! halved; an accepted step grows the step by 10%, up to ten times the
//! initial learning rate. The RMSE trace is therefore non-increasing.
//!
//! Parameters that are not free are either tied to a free parameter by a
//! closed-form expression or held constant. Gradients of tied parameters
//! flow back to their source through the chain rule.

use serde::{Deserialize, Serialize};

use crate::analysis::{Interval, DEFAULT_SAMPLES};
use crate::error::{Result, UafError};
use crate::targets::TargetActivation;
use crate::uaf::{logistic, PresetKind, UafParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Param {
    A,
    B,
    C,
    D,
    E,
}

impl Param {
    pub const ALL: [Param; 5] = [Param::A, Param::B, Param::C, Param::D, Param::E];

    fn index(self) -> usize {
        self as usize
    }
}

/// Closed catalog of tie expressions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieExpr {
    /// `value`
    Constant { value: f64 },
    /// `source + offset`
    Copy { source: Param, offset: f64 },
    /// `scale / source`
    Reciprocal { source: Param, scale: f64 },
}

impl TieExpr {
    fn source(&self) -> Option<Param> {
        match *self {
            TieExpr::Constant { .. } => None,
            TieExpr::Copy { source, .. } | TieExpr::Reciprocal { source, .. } => Some(source),
        }
    }

    fn value(&self, v: &[f64; 5]) -> f64 {
        match *self {
            TieExpr::Constant { value } => value,
            TieExpr::Copy { source, offset } => v[source.index()] + offset,
            TieExpr::Reciprocal { source, scale } => scale / v[source.index()],
        }
    }

    /// d(tied)/d(source)
    fn slope(&self, v: &[f64; 5]) -> f64 {
        match *self {
            TieExpr::Constant { .. } => 0.0,
            TieExpr::Copy { .. } => 1.0,
            TieExpr::Reciprocal { source, scale } => {
                let s = v[source.index()];
                -scale / (s * s)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tie {
    pub param: Param,
    pub expr: TieExpr,
}

impl Tie {
    pub fn new(param: Param, expr: TieExpr) -> Self {
        Tie { param, expr }
    }
}

fn default_interval() -> Interval {
    Interval::default()
}
fn default_samples() -> usize {
    DEFAULT_SAMPLES
}
fn default_max_iters() -> usize {
    100_000
}
fn default_learning_rate() -> f64 {
    0.1
}
fn default_tolerance() -> f64 {
    1e-12
}

/// A fitting problem. Parameters neither free nor tied keep their `init` value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSpec {
    pub target: TargetActivation,
    pub free: Vec<Param>,
    #[serde(default)]
    pub ties: Vec<Tie>,
    pub init: UafParams,
    #[serde(default = "default_interval")]
    pub interval: Interval,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    /// Stop once an accepted step improves the RMSE by less than this.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: UafParams,
    pub rmse: f64,
    pub iterations: usize,
    pub converged: bool,
    pub rmse_trace: Vec<f64>,
}

/// Names accepted by [`FitSpec::builtin`].
pub const BUILTIN_SPECS: [&str; 4] = [
    "sigmoid-family",
    "tanh-family",
    "gaussian-family",
    "relu-family",
];

impl FitSpec {
    fn with_defaults(kind: PresetKind, free: Vec<Param>, ties: Vec<Tie>, init: UafParams) -> Self {
        FitSpec {
            target: TargetActivation::new(kind).expect("builtin kinds are valid"),
            free,
            ties,
            init,
            interval: default_interval(),
            n_samples: default_samples(),
            max_iters: default_max_iters(),
            learning_rate: default_learning_rate(),
            tolerance: default_tolerance(),
        }
    }

    /// `A` free, `B = 1/(2A)`, `D = A`, `C = E = 0`.
    pub fn sigmoid_family() -> Self {
        Self::with_defaults(
            PresetKind::Sigmoid,
            vec![Param::A],
            vec![
                Tie::new(
                    Param::B,
                    TieExpr::Reciprocal {
                        source: Param::A,
                        scale: 0.5,
                    },
                ),
                Tie::new(
                    Param::D,
                    TieExpr::Copy {
                        source: Param::A,
                        offset: 0.0,
                    },
                ),
            ],
            UafParams::from_array([1.0, 0.0, 0.0, 0.0, 0.0]),
        )
    }

    /// `A` free, `B = 1/A`, `D = A`, `C = 0`, `E = -1`.
    pub fn tanh_family() -> Self {
        Self::with_defaults(
            PresetKind::Tanh,
            vec![Param::A],
            vec![
                Tie::new(
                    Param::B,
                    TieExpr::Reciprocal {
                        source: Param::A,
                        scale: 1.0,
                    },
                ),
                Tie::new(
                    Param::D,
                    TieExpr::Copy {
                        source: Param::A,
                        offset: 0.0,
                    },
                ),
                Tie::new(Param::E, TieExpr::Constant { value: -1.0 }),
            ],
            UafParams::from_array([2.0, 0.0, 0.0, 0.0, -1.0]),
        )
    }

    /// `C` free, `A = B = D = 0`, `E = ln 2`.
    pub fn gaussian_family() -> Self {
        Self::with_defaults(
            PresetKind::Gaussian,
            vec![Param::C],
            vec![Tie::new(
                Param::E,
                TieExpr::Constant {
                    value: std::f64::consts::LN_2,
                },
            )],
            UafParams::from_array([0.0, 0.0, -0.5, 0.0, std::f64::consts::LN_2]),
        )
    }

    /// `A` free, `D = A - 1`, `B = C = E = 0`. The RMSE keeps falling as `A`
    /// grows, so this fit runs to its iteration budget.
    pub fn relu_family() -> Self {
        let mut spec = Self::with_defaults(
            PresetKind::Relu,
            vec![Param::A],
            vec![Tie::new(
                Param::D,
                TieExpr::Copy {
                    source: Param::A,
                    offset: -1.0,
                },
            )],
            UafParams::from_array([10.0, 0.0, 0.0, 9.0, 0.0]),
        );
        spec.max_iters = 2_000;
        spec
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "sigmoid-family" => Some(Self::sigmoid_family()),
            "tanh-family" => Some(Self::tanh_family()),
            "gaussian-family" => Some(Self::gaussian_family()),
            "relu-family" => Some(Self::relu_family()),
            _ => None,
        }
    }

    /// All five parameters free.
    pub fn unconstrained(target: TargetActivation, init: UafParams, interval: Interval) -> Self {
        FitSpec {
            target,
            free: Param::ALL.to_vec(),
            ties: Vec::new(),
            init,
            interval,
            n_samples: default_samples(),
            max_iters: default_max_iters(),
            learning_rate: default_learning_rate(),
            tolerance: default_tolerance(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(UafError::InvalidFitSpec(msg));
        self.init.validate()?;
        self.interval.validate()?;
        if self.n_samples < 2 {
            return Err(UafError::TooFewSamples(self.n_samples));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            ));
        }
        if !(self.tolerance >= 0.0) {
            return bad(format!(
                "tolerance must be non-negative, got {}",
                self.tolerance
            ));
        }
        if self.free.is_empty() {
            return bad("no free parameters".into());
        }
        let mut role = [0u8; 5];
        for p in &self.free {
            if role[p.index()] != 0 {
                return bad(format!("{p:?} listed twice"));
            }
            role[p.index()] = 1;
        }
        for tie in &self.ties {
            if role[tie.param.index()] != 0 {
                return bad(format!(
                    "{:?} is both tied and free, or tied twice",
                    tie.param
                ));
            }
            role[tie.param.index()] = 2;
        }
        for tie in &self.ties {
            if let Some(src) = tie.expr.source() {
                if role[src.index()] != 1 {
                    return bad(format!("{:?} is tied to non-free {src:?}", tie.param));
                }
            }
            let finite = match tie.expr {
                TieExpr::Constant { value } => value.is_finite(),
                TieExpr::Copy { offset, .. } => offset.is_finite(),
                TieExpr::Reciprocal { scale, .. } => scale.is_finite(),
            };
            if !finite {
                return bad(format!(
                    "tie for {:?} has a non-finite coefficient",
                    tie.param
                ));
            }
        }
        Ok(())
    }

    fn apply_ties(&self, mut v: [f64; 5]) -> [f64; 5] {
        for tie in &self.ties {
            v[tie.param.index()] = tie.expr.value(&v);
        }
        v
    }
}

/// Samples and target values, fixed for the whole fit.
struct Problem<'a> {
    spec: &'a FitSpec,
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Problem<'_> {
    fn rmse(&self, v: &[f64; 5]) -> f64 {
        let p = UafParams::from_array(*v);
        let sum: f64 = self
            .xs
            .iter()
            .zip(&self.ys)
            .map(|(&x, &y)| (p.eval(x) - y).powi(2))
            .sum();
        (sum / self.xs.len() as f64).sqrt()
    }

    /// Gradient of half the mean squared error and the diagonal of the
    /// Gauss-Newton matrix, both with respect to the free parameters.
    fn gradient(&self, v: &[f64; 5]) -> (Vec<f64>, Vec<f64>) {
        let p = UafParams::from_array(*v);
        let spec = self.spec;

        // d(param_j)/d(free_k): identity for free params, tie slope for tied ones
        let mut chain = vec![[0.0; 5]; spec.free.len()];
        for (k, f) in spec.free.iter().enumerate() {
            chain[k][f.index()] = 1.0;
            for tie in &spec.ties {
                if tie.expr.source() == Some(*f) {
                    chain[k][tie.param.index()] = tie.expr.slope(v);
                }
            }
        }

        let mut g = vec![0.0; spec.free.len()];
        let mut h = vec![0.0; spec.free.len()];
        for (&x, &y) in self.xs.iter().zip(&self.ys) {
            let z1 = p.a * (x + p.b) + p.c * x * x;
            let z2 = p.d * (x - p.b);
            let (s1, s2) = (logistic(z1), logistic(z2));
            let err = p.eval(x) - y;
            let partial = [
                s1 * (x + p.b),
                s1 * p.a + s2 * p.d,
                s1 * x * x,
                -s2 * (x - p.b),
                1.0,
            ];
            for (k, c) in chain.iter().enumerate() {
                let j: f64 = partial.iter().zip(c).map(|(a, b)| a * b).sum();
                g[k] += err * j;
                h[k] += j * j;
            }
        }
        let n = self.xs.len() as f64;
        g.iter_mut().for_each(|v| *v /= n);
        h.iter_mut().for_each(|v| *v /= n);
        (g, h)
    }
}

pub fn fit(spec: &FitSpec) -> Result<FitResult> {
    spec.validate()?;
    let xs: Vec<f64> = spec.interval.grid(spec.n_samples).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| spec.target.eval(x)).collect();
    let problem = Problem { spec, xs, ys };

    let mut current = spec.apply_ties(spec.init.to_array());
    if current.iter().any(|v| !v.is_finite()) {
        return Err(UafError::InvalidFitSpec(
            "ties produce non-finite initial parameters".into(),
        ));
    }
    let mut rmse = problem.rmse(&current);
    let mut trace = vec![rmse];
    let mut iterations = 0;
    let mut converged = rmse == 0.0;
    let max_rate = spec.learning_rate * 10.0;
    let min_rate = spec.learning_rate * 1e-20;
    let mut rate = spec.learning_rate;

    while !converged && iterations < spec.max_iters {
        let (g, h) = problem.gradient(&current);
        let direction: Vec<f64> = g
            .iter()
            .zip(&h)
            .map(|(g, h)| if *h > 0.0 { g / h } else { 0.0 })
            .collect();
        if direction.iter().all(|d| *d == 0.0) {
            converged = true;
            break;
        }

        let accepted = loop {
            let mut trial = current;
            for (f, d) in spec.free.iter().zip(&direction) {
                trial[f.index()] -= rate * d;
            }
            let trial = spec.apply_ties(trial);
            if trial.iter().all(|v| v.is_finite()) {
                let r = problem.rmse(&trial);
                if r <= rmse {
                    break Some((trial, r));
                }
            }
            rate *= 0.5;
            if rate < min_rate {
                break None;
            }
        };

        let Some((trial, r)) = accepted else {
            // no descent left along the scaled gradient
            converged = true;
            break;
        };
        let improvement = rmse - r;
        current = trial;
        rmse = r;
        trace.push(r);
        rate = (rate * 1.1).min(max_rate);
        // the final sub-tolerance step is kept but not counted
        if improvement < spec.tolerance {
            converged = true;
        } else {
            iterations += 1;
        }
    }

    Ok(FitResult {
        params: UafParams::from_array(current),
        rmse,
        iterations,
        converged,
        rmse_trace: trace,
    })
}

/// Fit with all five parameters free and default settings.
pub fn fit_free(
    target: TargetActivation,
    init: UafParams,
    interval: Interval,
) -> Result<FitResult> {
    fit(&FitSpec::unconstrained(target, init, interval))
}
