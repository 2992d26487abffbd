//! Approximation-error analysis: extremum location, interval RMSE, and the
//! per-preset summary table.
//!
//! Extrema are found by scanning the analytic error derivative
//! `f_uaf'(x) - f_target'(x)` on a fine grid for sign changes and refining
//! each bracket by bisection. Targets with a kink or jump at zero are
//! searched on each side separately, and their one-sided limits at zero
//! are reported as singular points.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Result, UafError};
use crate::targets::{approx_error, TargetActivation};
use crate::uaf::{preset, PresetKind, UafParams};

/// Grid spacing for the derivative sign-change scan.
pub const SCAN_STEP: f64 = 1e-3;
/// Bisection stops once the bracket is narrower than this.
pub const ROOT_TOL: f64 = 1e-10;
/// Canonical sample count on [-10, 10].
pub const DEFAULT_SAMPLES: usize = 2001;
/// Errors below this are treated as exact representation.
pub const EXACT_TOL: f64 = 1e-12;

// Derivative magnitudes at or below this are rounding noise.
const DERIVATIVE_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(UafError::InvalidInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn symmetric(r: f64) -> Self {
        Interval { lo: -r, hi: r }
    }

    pub fn validate(&self) -> Result<()> {
        Interval::new(self.lo, self.hi).map(|_| ())
    }

    /// `n` evenly spaced points including both ends.
    pub fn grid(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        let span = self.hi - self.lo;
        let last = (n - 1) as f64;
        (0..n).map(move |i| {
            if i + 1 == n {
                self.hi
            } else {
                self.lo + span * (i as f64 / last)
            }
        })
    }

    fn contains_open(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }
}

impl Default for Interval {
    fn default() -> Self {
        Interval::symmetric(10.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub x: f64,
    pub error: f64,
}

/// Error behaviour at a point where the target is not smooth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularPoint {
    pub x: f64,
    /// Limit of the error as x approaches from below.
    pub error_left: f64,
    /// Limit of the error as x approaches from above.
    pub error_right: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub target: PresetKind,
    pub params: UafParams,
    pub interval: Interval,
    pub critical_points: Vec<CriticalPoint>,
    pub singular_points: Vec<SingularPoint>,
    pub max_abs_error: f64,
    /// Empty when the error never exceeds [`EXACT_TOL`].
    pub max_error_locations: Vec<f64>,
    pub rmse: f64,
    pub n_samples: usize,
}

fn error_slope(p: &UafParams, t: &TargetActivation, x: f64) -> f64 {
    p.grad(x).d_x - t.derivative(x)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let lo_positive = f_lo > 0.0;
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Roots of the error slope inside one smooth piece `[a, b]`.
fn scan_piece(p: &UafParams, t: &TargetActivation, a: f64, b: f64, out: &mut Vec<f64>) {
    let slope = |x: f64| error_slope(p, t, x);
    let steps = ((b - a) / SCAN_STEP).ceil().max(1.0) as usize;
    let at = |k: usize| {
        if k == steps {
            b
        } else {
            a + (b - a) * (k as f64 / steps as f64)
        }
    };
    let mut x_prev = a;
    let mut d_prev = slope(a);
    for k in 1..=steps {
        let x = at(k);
        let d = slope(x);
        let significant = d_prev.abs() > DERIVATIVE_FLOOR || d.abs() > DERIVATIVE_FLOOR;
        if significant && d == 0.0 && k < steps {
            // exact hit; only a root if the sign differs on either side
            let d_next = slope(at(k + 1));
            if d_prev * d_next < 0.0 {
                out.push(x);
            }
        } else if significant && d_prev != 0.0 && d_prev * d < 0.0 {
            out.push(bisect(slope, x_prev, x, d_prev));
        }
        x_prev = x;
        d_prev = d;
    }
}

/// Interior points where the derivative of the approximation error changes
/// sign, sorted ascending, with the error there.
pub fn critical_points(
    p: &UafParams,
    t: &TargetActivation,
    interval: Interval,
) -> Result<Vec<CriticalPoint>> {
    interval.validate()?;
    p.validate()?;
    let mut roots = Vec::new();
    match t.singularity() {
        Some(_) if interval.contains_open(0.0) => {
            // keep the scan off the non-smooth point itself
            let nudge = 1e-12;
            scan_piece(p, t, interval.lo, -nudge, &mut roots);
            scan_piece(p, t, nudge, interval.hi, &mut roots);
        }
        _ => scan_piece(p, t, interval.lo, interval.hi, &mut roots),
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < ROOT_TOL);
    Ok(roots
        .into_iter()
        .map(|x| CriticalPoint {
            x,
            error: approx_error(p, t, x),
        })
        .collect())
}

/// Root-mean-square error over `n_samples` evenly spaced points, both ends included.
pub fn interval_rmse(
    p: &UafParams,
    t: &TargetActivation,
    interval: Interval,
    n_samples: usize,
) -> Result<f64> {
    interval.validate()?;
    if n_samples < 2 {
        return Err(UafError::TooFewSamples(n_samples));
    }
    let sum: f64 = interval
        .grid(n_samples)
        .map(|x| approx_error(p, t, x).powi(2))
        .sum();
    Ok((sum / n_samples as f64).sqrt())
}

pub fn error_report(
    p: &UafParams,
    t: &TargetActivation,
    interval: Interval,
    n_samples: usize,
) -> Result<ErrorReport> {
    let rmse = interval_rmse(p, t, interval, n_samples)?;
    let critical = critical_points(p, t, interval)?;

    let mut singular = Vec::new();
    if t.singularity().is_some() && interval.contains_open(0.0) {
        let f0 = p.eval(0.0);
        let (left, right) = t.limits_at_zero();
        singular.push(SingularPoint {
            x: 0.0,
            error_left: f0 - left,
            error_right: f0 - right,
        });
    }

    let mut candidates: Vec<(f64, f64)> = critical.iter().map(|c| (c.x, c.error)).collect();
    for s in &singular {
        candidates.push((s.x, s.error_left));
        candidates.push((s.x, s.error_right));
    }
    for x in [interval.lo, interval.hi] {
        candidates.push((x, approx_error(p, t, x)));
    }

    let max_abs_error = candidates.iter().map(|(_, e)| e.abs()).fold(0.0, f64::max);
    let mut locations: Vec<f64> = if max_abs_error <= EXACT_TOL {
        Vec::new()
    } else {
        candidates
            .iter()
            .filter(|(_, e)| e.abs() >= max_abs_error * (1.0 - 1e-6))
            .map(|(x, _)| *x)
            .collect()
    };
    locations.sort_by(f64::total_cmp);
    locations.dedup();

    Ok(ErrorReport {
        target: t.kind(),
        params: *p,
        interval,
        critical_points: critical,
        singular_points: singular,
        max_abs_error,
        max_error_locations: locations,
        rmse,
        n_samples,
    })
}

/// Report for a preset against its own target.
pub fn preset_report(
    kind: PresetKind,
    interval: Interval,
    n_samples: usize,
) -> Result<ErrorReport> {
    let p = preset(kind)?;
    let t = TargetActivation::new(kind)?;
    error_report(&p, &t, interval, n_samples)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmseRow {
    pub kind: PresetKind,
    pub rmse: f64,
    pub max_error: f64,
    pub locations: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmseTable {
    pub interval: Interval,
    pub n_samples: usize,
    pub rows: Vec<RmseRow>,
}

impl RmseTable {
    pub fn row(&self, name: &str) -> Option<&RmseRow> {
        self.rows.iter().find(|r| r.kind.name() == name)
    }

    fn locations_label(row: &RmseRow) -> String {
        if row.locations.is_empty() {
            return "none".to_string();
        }
        // a symmetric pair prints as ±x
        if row.locations.len() == 2 && (row.locations[0] + row.locations[1]).abs() < 1e-6 {
            return format!("±{:.4}", row.locations[1].abs());
        }
        row.locations
            .iter()
            .map(|x| format!("{x:.4}"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("activation,rmse,max_error,locations\n");
        for row in &self.rows {
            let locs = row
                .locations
                .iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(";");
            let _ = writeln!(
                out,
                "{},{:.5},{:.5},{}",
                row.kind.name(),
                row.rmse,
                row.max_error,
                locs
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<12} {:>10} {:>10}  {}\n",
            "activation", "rmse", "max error", "locations"
        );
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{:<12} {:>10.5} {:>10.5}  {}",
                row.kind.name(),
                row.rmse,
                row.max_error,
                Self::locations_label(row)
            );
        }
        out
    }
}

/// One row per preset on [-10, 10]; leaky relu at slope 0.1.
pub fn rmse_table(n_samples: usize) -> Result<RmseTable> {
    let interval = Interval::default();
    let rows = PresetKind::all()
        .into_iter()
        .map(|kind| {
            let r = preset_report(kind, interval, n_samples)?;
            Ok(RmseRow {
                kind,
                rmse: r.rmse,
                max_error: r.max_abs_error,
                locations: r.max_error_locations,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RmseTable {
        interval,
        n_samples,
        rows,
    })
}

/// Terms of the closed-form equation `dE/dx = 0` for a preset family.
/// Their sum is the residual; the sum of magnitudes sets its scale.
fn characteristic_terms(kind: PresetKind, p: &UafParams, x: f64) -> Result<Vec<f64>> {
    let exp = f64::exp;
    let a = p.a;
    let terms = match kind {
        PresetKind::Sigmoid => {
            let e = std::f64::consts::E;
            vec![
                (e - 1.0) * a * (exp(x) + 1.0).powi(2) * exp(a * x - 0.5),
                exp(x) * (exp(a * x - 0.5) + 1.0) * (-exp(a * x + 0.5) - 1.0),
            ]
        }
        PresetKind::Tanh => vec![
            -a * exp(a * x - 1.0),
            a * exp(a * x + 1.0),
            -2.0 * a * exp(a * x + 2.0 * x - 1.0),
            2.0 * a * exp(a * x + 2.0 * x + 1.0),
            -a * exp(a * x + 4.0 * x - 1.0),
            a * exp(a * x + 4.0 * x + 1.0),
            -4.0 * exp(a * x + 2.0 * x - 1.0),
            -4.0 * exp(a * x + 2.0 * x + 1.0),
            -4.0 * exp(2.0 * a * x + 2.0 * x),
            -4.0 * exp(2.0 * x),
        ],
        PresetKind::Relu => {
            if x > 0.0 {
                vec![(a - 1.0) * exp(a * x), -a * exp((a - 1.0) * x), -1.0]
            } else {
                vec![a * exp(x), exp(a * x), 1.0, -a]
            }
        }
        PresetKind::LeakyRelu { alpha } => {
            if x > 0.0 {
                vec![
                    (alpha - 1.0) * exp(-alpha * x),
                    alpha * exp(x - alpha * x),
                    -1.0,
                ]
            } else {
                vec![-alpha * exp(x), -alpha, exp(x) * exp(-alpha * x), exp(x)]
            }
        }
        PresetKind::Gaussian => {
            let c = p.c;
            let q = exp(c * x * x);
            vec![
                2.0 * c * x * q / (1.0 + q),
                x * std::f64::consts::LN_2 * exp(-0.5 * x * x),
            ]
        }
        other => return Err(UafError::NoCharacteristicEquation(other.to_string())),
    };
    Ok(terms)
}

/// Left-hand side of the family's characteristic equation at `x`. The
/// equations assume the family's parameter ties (e.g. `B = 1/(2A)` for the
/// sigmoid); only `A` (or `C` for the gaussian, `alpha` for leaky relu) is
/// read from `p`. Relu and leaky relu use the branch matching the sign of `x`.
pub fn characteristic_residual(kind: PresetKind, p: &UafParams, x: f64) -> Result<f64> {
    Ok(characteristic_terms(kind, p, x)?.iter().sum())
}

/// Residual divided by the sum of its terms' magnitudes; 0 when all terms vanish.
pub fn characteristic_residual_scaled(kind: PresetKind, p: &UafParams, x: f64) -> Result<f64> {
    let terms = characteristic_terms(kind, p, x)?;
    let scale: f64 = terms.iter().map(|t| t.abs()).sum();
    let sum: f64 = terms.iter().sum();
    Ok(if scale == 0.0 { 0.0 } else { sum / scale })
}
