use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ActivationConfig, FixedForm, NetworkConfig};
use crate::error::{Result, UafError};
use crate::targets::TargetActivation;
use crate::uaf::{preset, UafParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Batch statistics for batch norm.
    Train,
    /// Running statistics for batch norm.
    Eval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    /// Mean over every output entry of the squared residual.
    MeanSquared,
    /// Softmax cross-entropy, averaged over samples.
    SoftmaxCrossEntropy,
}

/// Running per-feature statistics for one normalized layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchNormState {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub momentum: f64,
    pub epsilon: f64,
}

impl BatchNormState {
    pub fn new(width: usize, momentum: f64, epsilon: f64) -> Self {
        BatchNormState {
            mu: vec![0.0; width],
            sigma: vec![1.0; width],
            momentum,
            epsilon,
        }
    }

    pub fn update(&mut self, batch_mu: &Array1<f64>, batch_sigma: &Array1<f64>) {
        let m = self.momentum;
        for (r, b) in self.mu.iter_mut().zip(batch_mu) {
            *r = (1.0 - m) * *r + m * b;
        }
        for (r, b) in self.sigma.iter_mut().zip(batch_sigma) {
            *r = (1.0 - m) * *r + m * b.max(self.epsilon);
        }
    }
}

/// Per-column mean and population standard deviation.
pub(crate) fn column_stats(z: &Array2<f64>) -> (Array1<f64>, Array1<f64>) {
    let n = z.nrows() as f64;
    let mu = z.sum_axis(Axis(0)) / n;
    let centered = z - &mu;
    let var = (&centered * &centered).sum_axis(Axis(0)) / n;
    (mu, var.mapv(f64::sqrt))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Activation {
    Uaf(UafParams),
    Exact(TargetActivation),
}

impl Activation {
    fn eval(&self, x: f64) -> f64 {
        match self {
            Activation::Uaf(p) => p.eval(x),
            Activation::Exact(t) => t.eval(x),
        }
    }
}

/// Values kept from the forward pass of one hidden layer.
#[derive(Debug, Clone)]
pub struct LayerCache {
    pub input: Array2<f64>,
    /// Affine output before normalization.
    pub pre_norm: Array2<f64>,
    /// Activation input (equal to `pre_norm` without batch norm).
    pub normalized: Array2<f64>,
    /// Per-feature mean and effective std used, when batch norm is on.
    pub norm_stats: Option<(Array1<f64>, Array1<f64>)>,
    /// Features whose std was clamped to epsilon (batch statistics only).
    pub clamped: Option<Vec<bool>>,
    pub output: Array2<f64>,
}

#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub mode: Mode,
    pub layers: Vec<LayerCache>,
    /// Input to the output layer.
    pub last_hidden: Array2<f64>,
    pub output: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    /// Sum over every activation site; `None` for a frozen activation.
    pub uaf: Option<[f64; 5]>,
}

impl Gradients {
    /// Same ordering as [`Network::flat_params`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        if let Some(u) = self.uaf {
            out.extend(u);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub config: NetworkConfig,
    /// Layer `l` maps width `layer_sizes[l]` to `layer_sizes[l + 1]`.
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub batch_norm: Vec<Option<BatchNormState>>,
    /// The shared trainable UAF, if any.
    pub uaf: Option<UafParams>,
    fixed: Option<Activation>,
}

impl Network {
    /// Weights uniform in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn new(config: &NetworkConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let sizes = &config.layer_sizes;
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for pair in sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            weights.push(Array2::from_shape_fn((fan_in, fan_out), |_| {
                rng.gen_range(-limit..limit)
            }));
            biases.push(Array1::zeros(fan_out));
        }
        let batch_norm = (0..config.hidden_layers())
            .map(|l| {
                config.batch_norm_on(l).then(|| {
                    BatchNormState::new(sizes[l + 1], config.bn_momentum, config.bn_epsilon)
                })
            })
            .collect();
        let (uaf, fixed) = match config.activation {
            ActivationConfig::TrainableUaf { init } => (Some(init), None),
            ActivationConfig::Fixed { preset: kind, form } => {
                let act = match form {
                    FixedForm::Uaf => Activation::Uaf(preset(kind)?),
                    FixedForm::Exact => Activation::Exact(TargetActivation::new(kind)?),
                };
                (None, Some(act))
            }
        };
        Ok(Network {
            config: config.clone(),
            weights,
            biases,
            batch_norm,
            uaf,
            fixed,
        })
    }

    fn activation(&self) -> Activation {
        match self.uaf {
            Some(p) => Activation::Uaf(p),
            None => self
                .fixed
                .expect("fixed activation is set when not trainable"),
        }
    }

    pub fn input_width(&self) -> usize {
        self.config.layer_sizes[0]
    }

    pub fn output_width(&self) -> usize {
        *self.config.layer_sizes.last().unwrap()
    }

    pub fn forward(&self, batch: ArrayView2<f64>, mode: Mode) -> Result<ForwardPass> {
        if batch.ncols() != self.input_width() {
            return Err(UafError::ShapeMismatch {
                expected: format!("{} input columns", self.input_width()),
                got: format!("{}", batch.ncols()),
            });
        }
        if batch.nrows() == 0 {
            return Err(UafError::ShapeMismatch {
                expected: "at least one row".into(),
                got: "0".into(),
            });
        }
        let act = self.activation();
        let eps = self.config.bn_epsilon;
        let hidden = self.config.hidden_layers();
        let mut a = batch.to_owned();
        let mut layers = Vec::with_capacity(hidden);
        for l in 0..hidden {
            let z = a.dot(&self.weights[l]) + &self.biases[l];
            let (normalized, norm_stats, clamped) = match (&self.batch_norm[l], mode) {
                (None, _) => (z.clone(), None, None),
                (Some(_), Mode::Train) => {
                    let (mu, sigma) = column_stats(&z);
                    let clamped: Vec<bool> = sigma.iter().map(|s| *s < eps).collect();
                    let scale = sigma.mapv(|s| s.max(eps));
                    let zn = (&z - &mu) / &scale;
                    (zn, Some((mu, scale)), Some(clamped))
                }
                (Some(state), Mode::Eval) => {
                    let mu = Array1::from(state.mu.clone());
                    let scale = Array1::from(state.sigma.clone()).mapv(|s| s.max(eps));
                    let zn = (&z - &mu) / &scale;
                    (zn, Some((mu, scale)), None)
                }
            };
            let out = normalized.mapv(|v| act.eval(v));
            layers.push(LayerCache {
                input: a,
                pre_norm: z,
                normalized,
                norm_stats,
                clamped,
                output: out.clone(),
            });
            a = out;
        }
        let output = a.dot(&self.weights[hidden]) + &self.biases[hidden];
        Ok(ForwardPass {
            mode,
            layers,
            last_hidden: a,
            output,
        })
    }

    pub fn loss(output: &Array2<f64>, targets: ArrayView2<f64>, loss: Loss) -> f64 {
        match loss {
            Loss::MeanSquared => {
                let d = output - &targets;
                (&d * &d).sum() / d.len() as f64
            }
            Loss::SoftmaxCrossEntropy => {
                let n = output.nrows() as f64;
                let mut total = 0.0;
                for (row, t) in output.outer_iter().zip(targets.outer_iter()) {
                    let m = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                    let lse = m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
                    total -= row.iter().zip(t).map(|(v, t)| t * (v - lse)).sum::<f64>();
                }
                total / n
            }
        }
    }

    fn output_gradient(output: &Array2<f64>, targets: ArrayView2<f64>, loss: Loss) -> Array2<f64> {
        match loss {
            Loss::MeanSquared => (output - &targets) * (2.0 / output.len() as f64),
            Loss::SoftmaxCrossEntropy => {
                let n = output.nrows() as f64;
                let mut g = output.clone();
                for mut row in g.outer_iter_mut() {
                    let m = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                    row.mapv_inplace(|v| (v - m).exp());
                    let s = row.sum();
                    row.mapv_inplace(|v| v / s);
                }
                (g - targets) / n
            }
        }
    }

    /// Loss and exact gradients for the batch behind `pass`.
    pub fn backward(
        &self,
        pass: &ForwardPass,
        targets: ArrayView2<f64>,
        loss: Loss,
    ) -> Result<(f64, Gradients)> {
        if targets.dim() != pass.output.dim() {
            return Err(UafError::ShapeMismatch {
                expected: format!("targets {:?}", pass.output.dim()),
                got: format!("{:?}", targets.dim()),
            });
        }
        let hidden = self.config.hidden_layers();
        let value = Self::loss(&pass.output, targets, loss);
        let mut grad_w = vec![Array2::zeros((0, 0)); hidden + 1];
        let mut grad_b = vec![Array1::zeros(0); hidden + 1];
        let mut grad_uaf = [0.0; 5];

        let mut upstream = Self::output_gradient(&pass.output, targets, loss);
        grad_w[hidden] = pass.last_hidden.t().dot(&upstream);
        grad_b[hidden] = upstream.sum_axis(Axis(0));
        let mut d_act = upstream.dot(&self.weights[hidden].t());

        for l in (0..hidden).rev() {
            let cache = &pass.layers[l];
            // through the activation
            let mut d_norm = d_act.clone();
            match self.activation() {
                Activation::Uaf(p) => {
                    let trainable = self.uaf.is_some();
                    for (d, &v) in d_norm.iter_mut().zip(cache.normalized.iter()) {
                        let g = p.grad(v);
                        if trainable {
                            for (acc, gp) in grad_uaf.iter_mut().zip(g.params()) {
                                *acc += *d * gp;
                            }
                        }
                        *d *= g.d_x;
                    }
                }
                Activation::Exact(t) => {
                    for (d, &v) in d_norm.iter_mut().zip(cache.normalized.iter()) {
                        *d *= t.derivative(v);
                    }
                }
            }
            // through batch norm
            let d_pre = match (&cache.norm_stats, pass.mode) {
                (None, _) => d_norm,
                (Some((_, scale)), Mode::Eval) => d_norm / scale,
                (Some((_, scale)), Mode::Train) => {
                    let n = d_norm.nrows() as f64;
                    let clamped = cache.clamped.as_ref().expect("train pass records clamping");
                    let mean_d = d_norm.sum_axis(Axis(0)) / n;
                    let mean_dy = (&d_norm * &cache.normalized).sum_axis(Axis(0)) / n;
                    let mut out = &d_norm - &mean_d;
                    for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
                        let y = cache.normalized.column(j);
                        if !clamped[j] {
                            // the std itself depends on the batch
                            col.zip_mut_with(&y, |o, &yv| *o -= yv * mean_dy[j]);
                        }
                        col.mapv_inplace(|o| o / scale[j]);
                    }
                    out
                }
            };
            upstream = d_pre;
            grad_w[l] = cache.input.t().dot(&upstream);
            grad_b[l] = upstream.sum_axis(Axis(0));
            if l > 0 {
                d_act = upstream.dot(&self.weights[l].t());
            }
        }

        Ok((
            value,
            Gradients {
                weights: grad_w,
                biases: grad_b,
                uaf: self.uaf.map(|_| grad_uaf),
            },
        ))
    }

    /// Weights and biases layer by layer, then the UAF parameters if trainable.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        if let Some(p) = self.uaf {
            out.extend(p.to_array());
        }
        out
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) {
        let mut it = flat.iter().copied();
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            w.iter_mut()
                .for_each(|v| *v = it.next().expect("flat length"));
            b.iter_mut()
                .for_each(|v| *v = it.next().expect("flat length"));
        }
        if let Some(p) = self.uaf.as_mut() {
            let mut arr = [0.0; 5];
            arr.iter_mut()
                .for_each(|v| *v = it.next().expect("flat length"));
            *p = UafParams::from_array(arr);
        }
    }

    /// Number of trailing flat parameters that belong to the UAF.
    pub fn uaf_param_count(&self) -> usize {
        if self.uaf.is_some() {
            5
        } else {
            0
        }
    }

    /// Folds the batch statistics of a training pass into the running ones.
    pub fn update_running_stats(&mut self, pass: &ForwardPass) {
        if pass.mode != Mode::Train {
            return;
        }
        for (state, cache) in self.batch_norm.iter_mut().zip(&pass.layers) {
            if let (Some(state), Some(_)) = (state.as_mut(), &cache.norm_stats) {
                let (mu, sigma) = column_stats(&cache.pre_norm);
                state.update(&mu, &sigma);
            }
        }
    }

    pub fn predict(&self, inputs: ArrayView2<f64>) -> Result<Array2<f64>> {
        Ok(self.forward(inputs, Mode::Eval)?.output)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{OptimizerConfig, OutputActivation};
    use crate::uaf::PresetKind;
    use ndarray::array;
    use rand_distr::{Distribution, Normal};

    fn config(sizes: Vec<usize>, activation: ActivationConfig, bn: bool) -> NetworkConfig {
        let hidden = sizes.len() - 2;
        NetworkConfig {
            layer_sizes: sizes,
            activation,
            use_batch_norm: vec![bn; hidden],
            output_activation: OutputActivation::Identity,
            seed: 7,
            optimizer: OptimizerConfig::Sgd { lr: 0.1 },
            batch_size: 8,
            epochs: 1,
            uaf_lr_scale: 1.0,
            bn_momentum: 0.1,
            bn_epsilon: 1e-5,
        }
    }

    fn identity_fixed() -> ActivationConfig {
        ActivationConfig::Fixed {
            preset: PresetKind::Identity,
            form: FixedForm::Exact,
        }
    }

    #[test]
    fn zero_network_outputs_zero() {
        let mut net = Network::new(&config(vec![3, 4, 2], identity_fixed(), false)).unwrap();
        let n = net.flat_params().len();
        net.set_flat_params(&vec![0.0; n]);
        let out = net
            .predict(array![[1.0, -2.0, 3.0], [0.5, 0.5, 0.5]].view())
            .unwrap();
        assert!(out.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn identity_uaf_passes_input_through() {
        let cfg = config(
            vec![1, 1, 1],
            ActivationConfig::TrainableUaf {
                init: UafParams::identity(),
            },
            false,
        );
        let mut net = Network::new(&cfg).unwrap();
        net.weights[0][[0, 0]] = 1.0;
        net.weights[1][[0, 0]] = 1.0;
        let x = array![[-3.0], [0.0], [0.25], [7.0]];
        let out = net.predict(x.view()).unwrap();
        for (o, i) in out.iter().zip(x.iter()) {
            assert!((o - i).abs() < 1e-12);
        }
    }

    #[test]
    fn batch_norm_of_one_two_three() {
        let cfg = config(vec![1, 1, 1], identity_fixed(), true);
        let mut net = Network::new(&cfg).unwrap();
        net.weights[0][[0, 0]] = 1.0;
        let pass = net
            .forward(array![[1.0], [2.0], [3.0]].view(), Mode::Train)
            .unwrap();
        let (mu, sd) = column_stats(&pass.layers[0].normalized);
        assert!(mu[0].abs() < 1e-9);
        assert!((sd[0] - 1.0).abs() < 1e-9);
        // mean 2, population std sqrt(2/3)
        let expect = -1.0 / (2.0f64 / 3.0).sqrt();
        assert!((pass.layers[0].normalized[[0, 0]] - expect).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let net = Network::new(&config(vec![3, 4, 2], identity_fixed(), false)).unwrap();
        assert!(matches!(
            net.forward(array![[1.0, 2.0]].view(), Mode::Eval),
            Err(UafError::ShapeMismatch { .. })
        ));
        let pass = net
            .forward(array![[1.0, 2.0, 3.0]].view(), Mode::Eval)
            .unwrap();
        assert!(net
            .backward(&pass, array![[1.0, 2.0, 3.0]].view(), Loss::MeanSquared)
            .is_err());
    }

    #[test]
    fn zero_residual_gives_zero_gradient() {
        let cfg = config(
            vec![2, 3, 1],
            ActivationConfig::TrainableUaf {
                init: UafParams::identity(),
            },
            false,
        );
        let net = Network::new(&cfg).unwrap();
        let x = array![[0.3, -1.0], [2.0, 0.5]];
        let pass = net.forward(x.view(), Mode::Train).unwrap();
        let targets = pass.output.clone();
        let (loss, g) = net
            .backward(&pass, targets.view(), Loss::MeanSquared)
            .unwrap();
        assert_eq!(loss, 0.0);
        assert!(g.flatten().iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn frozen_activation_has_no_uaf_gradient() {
        let cfg = config(
            vec![2, 3, 1],
            ActivationConfig::Fixed {
                preset: PresetKind::Tanh,
                form: FixedForm::Uaf,
            },
            true,
        );
        let net = Network::new(&cfg).unwrap();
        let x = array![[0.3, -1.0], [2.0, 0.5], [1.0, 1.0]];
        let pass = net.forward(x.view(), Mode::Train).unwrap();
        let (_, g) = net
            .backward(&pass, array![[1.0], [0.0], [2.0]].view(), Loss::MeanSquared)
            .unwrap();
        assert!(g.uaf.is_none());
        assert_eq!(g.flatten().len(), net.flat_params().len());
    }

    fn check_gradients(net: &Network, x: &Array2<f64>, t: &Array2<f64>, loss: Loss, mode: Mode) {
        let pass = net.forward(x.view(), mode).unwrap();
        let (_, g) = net.backward(&pass, t.view(), loss).unwrap();
        let analytic = g.flatten();
        let base = net.flat_params();
        assert_eq!(analytic.len(), base.len());
        let h = 1e-6;
        let mut probe = net.clone();
        let mut loss_at = |params: &[f64]| {
            probe.set_flat_params(params);
            let out = probe.forward(x.view(), mode).unwrap().output;
            Network::loss(&out, t.view(), loss)
        };
        for i in 0..base.len() {
            let mut up = base.clone();
            up[i] += h;
            let mut dn = base.clone();
            dn[i] -= h;
            let numeric = (loss_at(&up) - loss_at(&dn)) / (2.0 * h);
            let a = analytic[i];
            let denom = a.abs().max(numeric.abs());
            let ok = if denom < 1e-6 {
                (a - numeric).abs() < 1e-9
            } else {
                (a - numeric).abs() / denom < 1e-4
            };
            assert!(ok, "param {i}: analytic {a} numeric {numeric}");
        }
    }

    fn random_batch(seed: u64, rows: usize, cols: usize) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0).unwrap();
        Array2::from_shape_fn((rows, cols), |_| normal.sample(&mut rng))
    }

    #[test]
    fn gradient_check_small_network() {
        let init = UafParams::new(1.3, 0.2, -0.15, 0.6, 0.05).unwrap();
        for bn in [false, true] {
            let cfg = config(vec![4, 3, 2], ActivationConfig::TrainableUaf { init }, bn);
            let net = Network::new(&cfg).unwrap();
            let x = random_batch(1, 8, 4);
            let t = random_batch(2, 8, 2);
            check_gradients(&net, &x, &t, Loss::MeanSquared, Mode::Train);
            let mut onehot = Array2::zeros((8, 2));
            for i in 0..8 {
                onehot[[i, i % 2]] = 1.0;
            }
            check_gradients(&net, &x, &onehot, Loss::SoftmaxCrossEntropy, Mode::Train);
            check_gradients(&net, &x, &t, Loss::MeanSquared, Mode::Eval);
        }
    }

    #[test]
    fn gradient_check_deeper_network() {
        let init = UafParams::new(0.9, -0.3, 0.1, -0.4, 0.2).unwrap();
        let mut cfg = config(
            vec![3, 5, 4, 2],
            ActivationConfig::TrainableUaf { init },
            true,
        );
        cfg.use_batch_norm = vec![true, false];
        let net = Network::new(&cfg).unwrap();
        let x = random_batch(3, 6, 3);
        let t = random_batch(4, 6, 2);
        check_gradients(&net, &x, &t, Loss::MeanSquared, Mode::Train);
    }

    #[test]
    fn single_row_batch_norm_is_finite() {
        let cfg = config(vec![2, 3, 1], identity_fixed(), true);
        let net = Network::new(&cfg).unwrap();
        let pass = net.forward(array![[1.0, 2.0]].view(), Mode::Train).unwrap();
        assert!(pass.output.iter().all(|v| v.is_finite()));
        let (_, g) = net
            .backward(&pass, array![[0.5]].view(), Loss::MeanSquared)
            .unwrap();
        assert!(g.flatten().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn shared_uaf_applies_everywhere() {
        let init = UafParams::new(1.1, 0.1, 0.05, -0.8, 0.0).unwrap();
        let mut cfg = config(
            vec![2, 3, 3, 1],
            ActivationConfig::TrainableUaf { init },
            false,
        );
        cfg.use_batch_norm = vec![];
        let mut net = Network::new(&cfg).unwrap();
        let x = random_batch(5, 4, 2);
        let perturbed = UafParams::new(1.2, 0.0, 0.0, -0.5, 0.3).unwrap();
        net.uaf = Some(perturbed);
        let pass = net.forward(x.view(), Mode::Eval).unwrap();
        for layer in &pass.layers {
            for (o, i) in layer.output.iter().zip(layer.normalized.iter()) {
                assert_eq!(*o, perturbed.eval(*i));
            }
        }
    }

    #[test]
    fn identity_uaf_matches_exact_identity() {
        let sizes = vec![5, 6, 6, 3];
        let trainable = config(
            sizes.clone(),
            ActivationConfig::TrainableUaf {
                init: UafParams::identity(),
            },
            true,
        );
        let exact = config(sizes, identity_fixed(), true);
        let a = Network::new(&trainable).unwrap();
        let b = Network::new(&exact).unwrap();
        let x = random_batch(9, 10, 5);
        let ya = a.forward(x.view(), Mode::Train).unwrap().output;
        let yb = b.forward(x.view(), Mode::Train).unwrap().output;
        for (u, v) in ya.iter().zip(yb.iter()) {
            assert!((u - v).abs() < 1e-9);
        }
    }

    proptest::proptest! {
        #[test]
        fn batch_norm_standardizes_each_feature(
            seed in 0u64..10_000,
            rows in 2usize..40,
            scale in 1e-2f64..1e3,
        ) {
            let mut cfg = config(vec![3, 4, 1], identity_fixed(), true);
            cfg.seed = seed;
            let net = Network::new(&cfg).unwrap();
            let x = random_batch(seed, rows, 3) * scale;
            let pass = net.forward(x.view(), Mode::Train).unwrap();
            let (mu, sd) = column_stats(&pass.layers[0].normalized);
            let clamped = pass.layers[0].clamped.as_ref().unwrap();
            for j in 0..4 {
                proptest::prop_assert!(mu[j].abs() < 1e-7);
                if !clamped[j] {
                    proptest::prop_assert!((sd[j] - 1.0).abs() < 1e-7, "std {}", sd[j]);
                }
            }
        }
    }

    #[test]
    fn running_stats_converge_to_batch_stats() {
        let cfg = config(vec![2, 2, 1], identity_fixed(), true);
        let mut net = Network::new(&cfg).unwrap();
        let x = random_batch(11, 64, 2);
        for _ in 0..300 {
            let pass = net.forward(x.view(), Mode::Train).unwrap();
            net.update_running_stats(&pass);
        }
        let z = x.dot(&net.weights[0]) + &net.biases[0];
        let (mu, sd) = column_stats(&z);
        let state = net.batch_norm[0].as_ref().unwrap();
        for j in 0..2 {
            assert!((state.mu[j] - mu[j]).abs() < 1e-9);
            assert!((state.sigma[j] - sd[j]).abs() < 1e-9);
            assert!(state.sigma[j] > 0.0);
        }
    }
}
