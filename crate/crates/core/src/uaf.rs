//! The five-parameter universal activation function
//!
//! ```text
//! f(x) = ln(1 + e^{A(x+B) + Cx²}) - ln(1 + e^{D(x-B)}) + E
//! ```
//!
//! Two evaluators are provided. [`eval_naive`] computes the formula as
//! written and reports overflow; it exists as a reference. [`eval_stable`]
//! rewrites each softplus as `max(z, 0) + log1p(e^{-|z|})` and is total on
//! finite inputs. Everything else in the crate uses the stable form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, UafError};

/// Slope used by the step and ReLU presets. Large enough to be sharp,
/// small enough that `exp` never overflows on batch-normalized inputs.
pub const STEP_SLOPE: f64 = 70.9992;
/// Sigmoid family slope, the RMSE optimum on [-10, 10] with `B = 1/(2A)`, `D = A`.
pub const SIGMOID_SLOPE: f64 = 1.01605291;
/// Tanh family slope, the RMSE optimum on [-10, 10] with `B = 1/A`, `D = A`, `E = -1`.
pub const TANH_SLOPE: f64 = 2.12616013;
/// ReLU family slope (`D = A - 1`).
pub const RELU_SLOPE: f64 = STEP_SLOPE;
/// Quadratic coefficient approximating `ln(2)·exp(-x²/2)`.
pub const GAUSSIAN_CURVATURE: f64 = -0.61341425;

/// Largest argument for which `exp` is finite.
fn exp_limit() -> f64 {
    f64::MAX.ln()
}

/// `ln(1 + e^z)` without overflow.
#[inline]
pub fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// `1 / (1 + e^{-z})` without overflow.
#[inline]
pub fn logistic(z: f64) -> f64 {
    let e = (-z.abs()).exp();
    if z >= 0.0 {
        1.0 / (1.0 + e)
    } else {
        e / (1.0 + e)
    }
}

/// Parameters `A..E`. Serialized as `{"A": .., "B": .., "C": .., "D": .., "E": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct UafParams {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "E")]
    pub e: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "B")]
    b: f64,
    #[serde(rename = "C")]
    c: f64,
    #[serde(rename = "D")]
    d: f64,
    #[serde(rename = "E")]
    e: f64,
}

impl TryFrom<RawParams> for UafParams {
    type Error = UafError;

    fn try_from(raw: RawParams) -> Result<Self> {
        UafParams::new(raw.a, raw.b, raw.c, raw.d, raw.e)
    }
}

impl fmt::Display for UafParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "A={} B={} C={} D={} E={}",
            self.a, self.b, self.c, self.d, self.e
        )
    }
}

impl UafParams {
    pub const NAMES: [&'static str; 5] = ["A", "B", "C", "D", "E"];

    pub fn new(a: f64, b: f64, c: f64, d: f64, e: f64) -> Result<Self> {
        let p = UafParams { a, b, c, d, e };
        p.validate()?;
        Ok(p)
    }

    pub const fn identity() -> Self {
        UafParams {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: -1.0,
            e: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in Self::NAMES.iter().zip(self.to_array()) {
            if !value.is_finite() {
                return Err(UafError::NonFiniteParameter { name, value });
            }
        }
        Ok(())
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.a, self.b, self.c, self.d, self.e]
    }

    pub fn from_array(v: [f64; 5]) -> Self {
        UafParams {
            a: v[0],
            b: v[1],
            c: v[2],
            d: v[3],
            e: v[4],
        }
    }

    /// Arguments of the rising and falling softplus arms at `x`.
    #[inline]
    fn arms(&self, x: f64) -> (f64, f64) {
        (
            self.a * (x + self.b) + self.c * x * x,
            self.d * (x - self.b),
        )
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let (z1, z2) = self.arms(x);
        softplus(z1) - softplus(z2) + self.e
    }

    #[inline]
    pub fn grad(&self, x: f64) -> UafGradient {
        let (z1, z2) = self.arms(x);
        let s1 = logistic(z1);
        let s2 = logistic(z2);
        UafGradient {
            d_x: s1 * (self.a + 2.0 * self.c * x) - s2 * self.d,
            d_a: s1 * (x + self.b),
            d_b: s1 * self.a + s2 * self.d,
            d_c: s1 * x * x,
            d_d: -s2 * (x - self.b),
            d_e: 1.0,
        }
    }
}

/// Partial derivatives of the UAF at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UafGradient {
    pub d_x: f64,
    pub d_a: f64,
    pub d_b: f64,
    pub d_c: f64,
    pub d_d: f64,
    pub d_e: f64,
}

impl UafGradient {
    /// Parameter partials in `A..E` order.
    pub fn params(&self) -> [f64; 5] {
        [self.d_a, self.d_b, self.d_c, self.d_d, self.d_e]
    }
}

/// Classic activations the UAF can be configured to mimic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PresetKind {
    Identity,
    Step,
    Sigmoid,
    Tanh,
    Relu,
    LeakyRelu { alpha: f64 },
    Softplus,
    Gaussian,
}

impl PresetKind {
    pub const DEFAULT_LEAKY_ALPHA: f64 = 0.1;

    /// The eight catalog entries, leaky relu at its default slope.
    pub fn all() -> [PresetKind; 8] {
        [
            PresetKind::Identity,
            PresetKind::Step,
            PresetKind::Relu,
            PresetKind::LeakyRelu {
                alpha: Self::DEFAULT_LEAKY_ALPHA,
            },
            PresetKind::Sigmoid,
            PresetKind::Tanh,
            PresetKind::Softplus,
            PresetKind::Gaussian,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            PresetKind::Identity => "identity",
            PresetKind::Step => "step",
            PresetKind::Sigmoid => "sigmoid",
            PresetKind::Tanh => "tanh",
            PresetKind::Relu => "relu",
            PresetKind::LeakyRelu { .. } => "leaky_relu",
            PresetKind::Softplus => "softplus",
            PresetKind::Gaussian => "gaussian",
        }
    }

    /// Parses a CLI name; `alpha` is only consulted for `leaky_relu`.
    pub fn from_name(name: &str, alpha: f64) -> Result<Self> {
        let kind = match name {
            "identity" => PresetKind::Identity,
            "step" => PresetKind::Step,
            "sigmoid" => PresetKind::Sigmoid,
            "tanh" => PresetKind::Tanh,
            "relu" => PresetKind::Relu,
            "leaky_relu" => PresetKind::LeakyRelu { alpha },
            "softplus" => PresetKind::Softplus,
            "gaussian" => PresetKind::Gaussian,
            other => return Err(UafError::UnknownKind(other.to_string())),
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn validate(&self) -> Result<()> {
        if let PresetKind::LeakyRelu { alpha } = *self {
            if !(alpha > 0.0 && alpha <= 0.1) {
                return Err(UafError::InvalidAlpha(alpha));
            }
        }
        Ok(())
    }
}

impl fmt::Display for PresetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PresetKind::LeakyRelu { alpha } => write!(f, "leaky_relu({alpha})"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for PresetKind {
    type Err = UafError;

    /// Accepts `leaky_relu` or `leaky_relu(0.05)`.
    fn from_str(s: &str) -> Result<Self> {
        if let Some(inner) = s
            .strip_prefix("leaky_relu(")
            .and_then(|r| r.strip_suffix(')'))
        {
            let alpha = inner
                .trim()
                .parse::<f64>()
                .map_err(|_| UafError::UnknownKind(s.to_string()))?;
            return PresetKind::from_name("leaky_relu", alpha);
        }
        PresetKind::from_name(s, Self::DEFAULT_LEAKY_ALPHA)
    }
}

/// Reference evaluation of the formula as written. Fails when either
/// exponent argument would overflow `exp`.
pub fn eval_naive(p: &UafParams, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(UafError::NonFiniteInput(x));
    }
    p.validate()?;
    let (z1, z2) = p.arms(x);
    for z in [z1, z2] {
        if !(z <= exp_limit()) {
            return Err(UafError::Overflow { argument: z });
        }
    }
    Ok((1.0 + z1.exp()).ln() - (1.0 + z2.exp()).ln() + p.e)
}

/// Overflow-free evaluation.
#[inline]
pub fn eval_stable(p: &UafParams, x: f64) -> f64 {
    p.eval(x)
}

#[inline]
pub fn grad(p: &UafParams, x: f64) -> UafGradient {
    p.grad(x)
}

pub fn eval_batch(p: &UafParams, xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| p.eval(x)).collect()
}

/// Parameter assignment that makes the UAF equal or approximate `kind`.
pub fn preset(kind: PresetKind) -> Result<UafParams> {
    kind.validate()?;
    let ln2 = std::f64::consts::LN_2;
    let p = match kind {
        PresetKind::Identity => UafParams::identity(),
        PresetKind::Step => UafParams {
            a: STEP_SLOPE,
            b: 1.0 / (2.0 * STEP_SLOPE),
            c: 0.0,
            d: STEP_SLOPE,
            e: 0.0,
        },
        PresetKind::Sigmoid => UafParams {
            a: SIGMOID_SLOPE,
            b: 1.0 / (2.0 * SIGMOID_SLOPE),
            c: 0.0,
            d: SIGMOID_SLOPE,
            e: 0.0,
        },
        PresetKind::Tanh => UafParams {
            a: TANH_SLOPE,
            b: 1.0 / TANH_SLOPE,
            c: 0.0,
            d: TANH_SLOPE,
            e: -1.0,
        },
        PresetKind::Relu => UafParams {
            a: RELU_SLOPE,
            b: 0.0,
            c: 0.0,
            d: RELU_SLOPE - 1.0,
            e: 0.0,
        },
        PresetKind::LeakyRelu { alpha } => UafParams {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: -alpha,
            e: 0.0,
        },
        PresetKind::Softplus => UafParams {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 0.0,
            e: ln2,
        },
        PresetKind::Gaussian => UafParams {
            a: 0.0,
            b: 0.0,
            c: GAUSSIAN_CURVATURE,
            d: 0.0,
            e: ln2,
        },
    };
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    fn step() -> UafParams {
        preset(PresetKind::Step).unwrap()
    }

    #[test]
    fn naive_examples() {
        let id = UafParams::identity();
        assert_eq!(eval_naive(&id, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(eval_naive(&id, 2.0).unwrap(), 2.0, epsilon = 1e-12);
        let sp = preset(PresetKind::Softplus).unwrap();
        assert_abs_diff_eq!(eval_naive(&sp, 0.0).unwrap(), LN_2, epsilon = 1e-15);
    }

    #[test]
    fn naive_reports_overflow() {
        let id = UafParams::identity();
        assert!(matches!(
            eval_naive(&id, 1000.0),
            Err(UafError::Overflow { .. })
        ));
        assert!(matches!(
            eval_naive(&id, -1000.0),
            Err(UafError::Overflow { .. })
        ));
    }

    #[test]
    fn stable_examples() {
        let id = UafParams::identity();
        assert_abs_diff_eq!(eval_stable(&id, 50.0), 50.0, epsilon = 1e-9);
        assert_abs_diff_eq!(eval_stable(&step(), 0.0), 0.5, epsilon = 1e-6);
        let big = eval_stable(&id, 1000.0);
        assert!(big.is_finite());
        assert_abs_diff_eq!(big, 1000.0, epsilon = 1e-9);
    }

    #[test]
    fn step_slope_offset_matches_printed_value() {
        assert_abs_diff_eq!(step().b, 0.007042, epsilon = 5e-7);
    }

    #[test]
    fn grad_examples() {
        assert_abs_diff_eq!(grad(&UafParams::identity(), 0.0).d_x, 1.0, epsilon = 1e-15);
        assert!(grad(&step(), 0.0).d_x > 0.0);
    }

    #[test]
    fn grad_matches_central_difference() {
        let p = UafParams::new(1.5, 0.3, -0.2, 0.7, 0.1).unwrap();
        let x = 0.9;
        let h = 1e-5;
        let g = grad(&p, x);
        let fd = |f: &dyn Fn(f64) -> f64| (f(h) - f(-h)) / (2.0 * h);
        let v = p.to_array();
        let shifted = |i: usize, dh: f64| {
            let mut q = v;
            q[i] += dh;
            UafParams::from_array(q).eval(x)
        };
        let checks = [
            (g.d_x, fd(&|dh| p.eval(x + dh))),
            (g.d_a, fd(&|dh| shifted(0, dh))),
            (g.d_b, fd(&|dh| shifted(1, dh))),
            (g.d_c, fd(&|dh| shifted(2, dh))),
            (g.d_d, fd(&|dh| shifted(3, dh))),
            (g.d_e, fd(&|dh| shifted(4, dh))),
        ];
        for (analytic, numeric) in checks {
            let rel = (analytic - numeric).abs() / analytic.abs();
            assert!(rel < 1e-5, "{analytic} vs {numeric}");
        }
    }

    #[test]
    fn naive_agrees_at_range_edges() {
        // arms at exactly +-500
        for (a, c, d, x) in [
            (50.0, 0.0, -50.0, 10.0),
            (-50.0, 0.0, 50.0, 10.0),
            (0.0, 5.0, 0.0, 10.0),
        ] {
            let p = UafParams::new(a, 0.0, c, d, 0.3).unwrap();
            assert!((eval_naive(&p, x).unwrap() - eval_stable(&p, x)).abs() < 1e-9);
        }
    }

    #[test]
    fn preset_table() {
        assert_eq!(
            preset(PresetKind::Identity).unwrap().to_array(),
            [1.0, 0.0, 0.0, -1.0, 0.0]
        );
        assert_eq!(
            preset(PresetKind::Gaussian).unwrap().to_array(),
            [0.0, 0.0, -0.61341425, 0.0, LN_2]
        );
        assert_eq!(
            preset(PresetKind::LeakyRelu { alpha: 0.1 })
                .unwrap()
                .to_array(),
            [1.0, 0.0, 0.0, -0.1, 0.0]
        );
        let t = preset(PresetKind::Tanh).unwrap();
        assert_eq!(t.d, t.a);
        assert_eq!(t.b, 1.0 / t.a);
        assert_eq!(t.e, -1.0);
    }

    #[test]
    fn preset_rejects_bad_alpha() {
        for alpha in [0.0, -0.05, 0.2, f64::NAN] {
            assert!(matches!(
                preset(PresetKind::LeakyRelu { alpha }),
                Err(UafError::InvalidAlpha(_))
            ));
        }
    }

    #[test]
    fn batch_examples() {
        let id = UafParams::identity();
        let out = eval_batch(&id, &[-1.0, 0.0, 1.0]);
        for (o, e) in out.iter().zip([-1.0, 0.0, 1.0]) {
            assert_abs_diff_eq!(*o, e, epsilon = 1e-15);
        }
        let sp = preset(PresetKind::Softplus).unwrap();
        assert_abs_diff_eq!(eval_batch(&sp, &[0.0])[0], LN_2, epsilon = 1e-15);
        let th = preset(PresetKind::Tanh).unwrap();
        let pair = eval_batch(&th, &[0.4, -0.4]);
        assert_abs_diff_eq!(pair[0], -pair[1], epsilon = 1e-6);
        assert!(eval_batch(&id, &[]).is_empty());
    }

    #[test]
    fn exact_presets_on_grid() {
        let id = UafParams::identity();
        let sp = preset(PresetKind::Softplus).unwrap();
        for i in 0..=6000 {
            let x = -30.0 + i as f64 * 0.01;
            assert!((eval_stable(&id, x) - x).abs() < 1e-12);
            assert!((eval_stable(&sp, x) - softplus(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn step_error_is_monotone_away_from_zero() {
        let p = step();
        let target = |x: f64| if x > 0.0 { 1.0 } else { 0.0 };
        let n = (10.0 / p.a / 1e-4).floor() as usize;
        let err = |x: f64| (eval_stable(&p, x) - target(x)).abs();
        let mut prev = err(1e-4);
        for k in 2..=n {
            let cur = err(k as f64 * 1e-4);
            assert!(cur < prev, "not decreasing at {}", k as f64 * 1e-4);
            prev = cur;
        }
        let mut prev = err(-(n as f64) * 1e-4);
        for k in (1..n).rev() {
            let cur = err(-(k as f64) * 1e-4);
            assert!(cur > prev, "not increasing at {}", -(k as f64) * 1e-4);
            prev = cur;
        }
    }

    #[test]
    fn json_shape() {
        let s = serde_json::to_string(&UafParams::identity()).unwrap();
        assert_eq!(s, r#"{"A":1.0,"B":0.0,"C":0.0,"D":-1.0,"E":0.0}"#);
        assert!(serde_json::from_str::<UafParams>(r#"{"A":1,"B":0,"C":0,"D":-1}"#).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in PresetKind::all() {
            assert_eq!(PresetKind::from_name(k.name(), 0.1).unwrap(), k);
        }
        assert_eq!(
            "leaky_relu(0.05)".parse::<PresetKind>().unwrap(),
            PresetKind::LeakyRelu { alpha: 0.05 }
        );
        assert!("mish".parse::<PresetKind>().is_err());
    }

    fn params(mag: f64) -> impl Strategy<Value = UafParams> {
        prop::array::uniform5(-mag..mag).prop_map(UafParams::from_array)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn grad_fd_agreement(p in params(5.0), x in -10.0f64..10.0) {
            let g = p.grad(x);
            let h = 1e-5;
            let arr = p.to_array();
            let mut numeric = [0.0; 6];
            numeric[0] = (p.eval(x + h) - p.eval(x - h)) / (2.0 * h);
            for i in 0..5 {
                let (mut up, mut dn) = (arr, arr);
                up[i] += h;
                dn[i] -= h;
                numeric[i + 1] = (UafParams::from_array(up).eval(x)
                    - UafParams::from_array(dn).eval(x)) / (2.0 * h);
            }
            let analytic = [g.d_x, g.d_a, g.d_b, g.d_c, g.d_d, g.d_e];
            for (a, n) in analytic.iter().zip(numeric) {
                if a.abs() < 1e-3 {
                    prop_assert!((a - n).abs() < 1e-7, "{} vs {}", a, n);
                } else {
                    prop_assert!((a - n).abs() / a.abs() < 1e-5, "{} vs {}", a, n);
                }
            }
            prop_assert_eq!(g.d_e, 1.0);
        }

        #[test]
        fn stable_is_total(p in params(200.0), x in -100.0f64..100.0) {
            prop_assert!(eval_stable(&p, x).is_finite());
            let g = p.grad(x);
            prop_assert!(g.params().iter().all(|v| v.is_finite()) && g.d_x.is_finite());
        }

        #[test]
        fn naive_agrees_with_stable(p in params(5.0), x in -10.0f64..10.0) {
            let z1 = p.a * (x + p.b) + p.c * x * x;
            let z2 = p.d * (x - p.b);
            prop_assume!(z1.abs() <= 500.0 && z2.abs() <= 500.0);
            let naive = eval_naive(&p, x).unwrap();
            prop_assert!((naive - eval_stable(&p, x)).abs() < 1e-9);
        }

        #[test]
        fn continuity(p in params(5.0), x in -10.0f64..10.0) {
            // |f(x+h) - f(x)| <= sup|f'| * h, and |f'| is bounded by |A| + 2|C||x| + |D| + 1 nearby
            let f0 = p.eval(x);
            let lip = p.a.abs() + 2.0 * p.c.abs() * (x.abs() + 1.0) + p.d.abs();
            for k in 1..10 {
                let h = 10f64.powi(-k);
                let diff = (p.eval(x + h) - f0).abs();
                prop_assert!(diff <= lip * h + 1e-12, "h={} diff={}", h, diff);
            }
        }
    }
}
