use ndarray::{s, Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, UafError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Regression,
    Classification,
}

/// Train, validation and test fractions. Rows are assigned in order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for Split {
    fn default() -> Self {
        Split {
            train: 0.7,
            validation: 0.15,
            test: 0.15,
        }
    }
}

impl Split {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.validation, self.test];
        if parts.iter().any(|f| !(0.0..=1.0).contains(f))
            || ((parts.iter().sum::<f64>()) - 1.0).abs() > 1e-9
        {
            return Err(UafError::InvalidDataset(format!(
                "split fractions must be in [0, 1] and sum to 1, got {parts:?}"
            )));
        }
        Ok(())
    }

    /// Row boundaries `(end of train, end of validation)` for `n` rows.
    pub fn bounds(&self, n: usize) -> (usize, usize) {
        let train = (self.train * n as f64).round() as usize;
        let val = ((self.train + self.validation) * n as f64).round() as usize;
        (train.min(n), val.min(n))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub inputs: Array2<f64>,
    pub targets: Array2<f64>,
    #[serde(default)]
    pub split: Split,
    pub kind: TaskKind,
}

impl Dataset {
    pub fn new(
        inputs: Array2<f64>,
        targets: Array2<f64>,
        split: Split,
        kind: TaskKind,
    ) -> Result<Self> {
        let d = Dataset {
            inputs,
            targets,
            split,
            kind,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(UafError::InvalidDataset(m));
        self.split.validate()?;
        if self.inputs.nrows() != self.targets.nrows() {
            return bad(format!(
                "{} input rows but {} target rows",
                self.inputs.nrows(),
                self.targets.nrows()
            ));
        }
        if self
            .inputs
            .iter()
            .chain(self.targets.iter())
            .any(|v| !v.is_finite())
        {
            return bad("non-finite entry".into());
        }
        if self.kind == TaskKind::Classification {
            for row in self.targets.outer_iter() {
                let ones = row.iter().filter(|v| **v == 1.0).count();
                let zeros = row.iter().filter(|v| **v == 0.0).count();
                if ones != 1 || ones + zeros != row.len() {
                    return bad("classification targets must be one-hot".into());
                }
            }
        }
        let (tr, _) = self.split.bounds(self.len());
        if tr == 0 {
            return bad("training split is empty".into());
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_features(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn n_outputs(&self) -> usize {
        self.targets.ncols()
    }

    fn part(&self, lo: usize, hi: usize) -> (ArrayView2<'_, f64>, ArrayView2<'_, f64>) {
        (
            self.inputs.slice(s![lo..hi, ..]),
            self.targets.slice(s![lo..hi, ..]),
        )
    }

    pub fn train(&self) -> (ArrayView2<'_, f64>, ArrayView2<'_, f64>) {
        let (a, _) = self.split.bounds(self.len());
        self.part(0, a)
    }

    pub fn validation(&self) -> (ArrayView2<'_, f64>, ArrayView2<'_, f64>) {
        let (a, b) = self.split.bounds(self.len());
        self.part(a, b)
    }

    pub fn test(&self) -> (ArrayView2<'_, f64>, ArrayView2<'_, f64>) {
        let (_, b) = self.split.bounds(self.len());
        self.part(b, self.len())
    }
}

/// Mixtures of `n_species` nonnegative spectra observed on `n_channels`
/// channels. Targets are the concentrations, uniform on `(0, 1]`. Pass
/// `f64::INFINITY` for noise-free inputs.
pub fn make_gas_analogue(
    seed: u64,
    n_samples: usize,
    n_channels: usize,
    n_species: usize,
    snr_db: f64,
) -> Result<Dataset> {
    if n_species == 0 || n_species > n_channels {
        return Err(UafError::InvalidDataset(format!(
            "need 1 <= n_species <= n_channels, got {n_species} species on {n_channels} channels"
        )));
    }
    if n_samples == 0 || snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(UafError::InvalidDataset(format!(
            "bad gas analogue arguments: n_samples {n_samples}, snr_db {snr_db}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mixing = Array2::from_shape_fn((n_channels, n_species), |_| rng.gen::<f64>());
    // 1 - U lies in (0, 1]
    let conc = Array2::from_shape_fn((n_samples, n_species), |_| 1.0 - rng.gen::<f64>());
    let mut inputs = conc.dot(&mixing.t());
    if snr_db.is_finite() {
        let signal_power = inputs.mapv(|v| v * v).mean().unwrap();
        let noise_sd = (signal_power / 10f64.powf(snr_db / 10.0)).sqrt();
        let normal =
            Normal::new(0.0, noise_sd).map_err(|e| UafError::InvalidDataset(e.to_string()))?;
        inputs.mapv_inplace(|v| v + normal.sample(&mut rng));
    }
    Dataset::new(inputs, conc, Split::default(), TaskKind::Regression)
}

/// Balanced gaussian clusters around seeded centers in `[-5, 5]^n_features`,
/// with one-hot targets. Row order is shuffled.
pub fn make_blobs(
    seed: u64,
    n_samples: usize,
    n_classes: usize,
    n_features: usize,
    spread: f64,
) -> Result<Dataset> {
    if n_classes < 2
        || n_features == 0
        || n_samples < n_classes
        || !(spread >= 0.0 && spread.is_finite())
    {
        return Err(UafError::InvalidDataset(format!(
            "bad blobs arguments: {n_samples} samples, {n_classes} classes, {n_features} features, spread {spread}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers = Array2::from_shape_fn((n_classes, n_features), |_| rng.gen_range(-5.0..5.0));
    let mut labels: Vec<usize> = (0..n_samples).map(|i| i % n_classes).collect();
    labels.shuffle(&mut rng);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut inputs = Array2::zeros((n_samples, n_features));
    let mut targets = Array2::zeros((n_samples, n_classes));
    for (i, &c) in labels.iter().enumerate() {
        for j in 0..n_features {
            inputs[[i, j]] = centers[[c, j]] + spread * normal.sample(&mut rng);
        }
        targets[[i, c]] = 1.0;
    }
    Dataset::new(inputs, targets, Split::default(), TaskKind::Classification)
}

/// Noise-free affine map of standard normal inputs.
pub fn make_linear(
    seed: u64,
    n_samples: usize,
    n_features: usize,
    n_outputs: usize,
) -> Result<Dataset> {
    if n_samples == 0 || n_features == 0 || n_outputs == 0 {
        return Err(UafError::InvalidDataset(
            "make_linear needs positive sizes".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let w = Array2::from_shape_fn((n_features, n_outputs), |_| normal.sample(&mut rng));
    let b: Vec<f64> = (0..n_outputs).map(|_| normal.sample(&mut rng)).collect();
    let inputs = Array2::from_shape_fn((n_samples, n_features), |_| normal.sample(&mut rng));
    let targets = inputs.dot(&w) + &ndarray::Array1::from(b);
    Dataset::new(inputs, targets, Split::default(), TaskKind::Regression)
}
