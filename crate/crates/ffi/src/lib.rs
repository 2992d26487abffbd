//! C ABI for `uafkit`.
//!
//! Every fallible function returns a [`UafkitStatus`] and writes its result
//! through an out-pointer. On failure, `uafkit_last_error()` describes the
//! problem until the next call on the same thread. Reports are opaque
//! handles released with their `_free` function; strings returned to the
//! caller are released with `uafkit_string_free`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, UnwindSafe};

use libc::{c_char, size_t};
use uafkit::analysis::{error_report, interval_rmse, ErrorReport, Interval};
use uafkit::fitter::{fit, FitResult, FitSpec};
use uafkit::network::{make_blobs, make_gas_analogue, train, Dataset, NetworkConfig, TrainReport};
use uafkit::targets::{approx_error, TargetActivation};
use uafkit::uaf::{eval_naive, preset, PresetKind, UafParams};
use uafkit::UafError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UafkitStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownKind = 3,
    Overflow = 4,
    InvalidJson = 5,
    Diverged = 6,
    IndexOutOfRange = 7,
    Panic = 8,
}

/// The five UAF parameters.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UafkitParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

/// Partial derivatives of the UAF at one input.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UafkitGradient {
    pub d_x: f64,
    pub d_a: f64,
    pub d_b: f64,
    pub d_c: f64,
    pub d_d: f64,
    pub d_e: f64,
}

pub struct UafkitErrorReport(ErrorReport);
pub struct UafkitFitResult(FitResult);
pub struct UafkitTrainReport(TrainReport);

impl From<UafParams> for UafkitParams {
    fn from(p: UafParams) -> Self {
        UafkitParams {
            a: p.a,
            b: p.b,
            c: p.c,
            d: p.d,
            e: p.e,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

struct Failure(UafkitStatus, String);

impl From<UafError> for Failure {
    fn from(e: UafError) -> Self {
        let status = match e {
            UafError::Overflow { .. } => UafkitStatus::Overflow,
            UafError::UnknownKind(_) => UafkitStatus::UnknownKind,
            UafError::Diverged { .. } => UafkitStatus::Diverged,
            _ => UafkitStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

type FfiResult<T> = Result<T, Failure>;

fn null(what: &str) -> Failure {
    Failure(UafkitStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `body`, storing its value through `out` on success.
fn guard<T>(out: *mut T, body: impl FnOnce() -> FfiResult<T> + UnwindSafe) -> UafkitStatus {
    if out.is_null() {
        set_error("output pointer is null");
        return UafkitStatus::NullPointer;
    }
    match catch_unwind(body) {
        Ok(Ok(v)) => {
            // SAFETY: checked non-null; the caller promises it is writable.
            unsafe { out.write(v) };
            set_error("");
            UafkitStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            UafkitStatus::Panic
        }
    }
}

unsafe fn params_in(p: *const UafkitParams) -> FfiResult<UafParams> {
    let p = p.as_ref().ok_or_else(|| null("params"))?;
    Ok(UafParams::new(p.a, p.b, p.c, p.d, p.e)?)
}

unsafe fn str_in<'a>(s: *const c_char, what: &str) -> FfiResult<&'a str> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        Failure(
            UafkitStatus::InvalidArgument,
            format!("`{what}` is not UTF-8"),
        )
    })
}

unsafe fn kind_in(s: *const c_char) -> FfiResult<PresetKind> {
    Ok(str_in(s, "kind")?.parse::<PresetKind>()?)
}

unsafe fn target_in(s: *const c_char) -> FfiResult<TargetActivation> {
    Ok(TargetActivation::new(kind_in(s)?)?)
}

fn json_string<T: serde::Serialize>(value: &T) -> FfiResult<*mut c_char> {
    let s = serde_json::to_string(value)
        .map_err(|e| Failure(UafkitStatus::InvalidJson, e.to_string()))?;
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|e| Failure(UafkitStatus::InvalidJson, e.to_string()))
}

fn json_in<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> FfiResult<T> {
    serde_json::from_str(text)
        .map_err(|e| Failure(UafkitStatus::InvalidJson, format!("{what}: {e}")))
}

unsafe fn handle<'a, T>(h: *const T) -> FfiResult<&'a T> {
    h.as_ref().ok_or_else(|| null("handle"))
}

/// Message for the most recent failure on this thread; empty after a
/// success. Valid until the next `uafkit_` call on the same thread.
#[no_mangle]
pub extern "C" fn uafkit_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must come from a `uafkit_*_to_json` or `_to_csv` function and not
/// be freed yet.
#[no_mangle]
pub unsafe extern "C" fn uafkit_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Overflow-free evaluation.
///
/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uafkit_eval_stable(
    params: *const UafkitParams,
    x: f64,
    out: *mut f64,
) -> UafkitStatus {
    guard(out, || Ok(params_in(params)?.eval(x)))
}

/// Direct evaluation; fails with `OVERFLOW` where `exp` would overflow.
///
/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uafkit_eval_naive(
    params: *const UafkitParams,
    x: f64,
    out: *mut f64,
) -> UafkitStatus {
    guard(out, || Ok(eval_naive(&params_in(params)?, x)?))
}

/// Evaluates `n` inputs from `xs` into `out`.
///
/// # Safety
/// `xs` and `out` must each hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn uafkit_eval_batch(
    params: *const UafkitParams,
    xs: *const f64,
    n: size_t,
    out: *mut f64,
) -> UafkitStatus {
    let mut unit = ();
    guard(&mut unit, || {
        let p = params_in(params)?;
        if n == 0 {
            return Ok(());
        }
        if xs.is_null() || out.is_null() {
            return Err(null("xs or out"));
        }
        let xs = std::slice::from_raw_parts(xs, n);
        let out = std::slice::from_raw_parts_mut(out, n);
        for (o, x) in out.iter_mut().zip(xs) {
            *o = p.eval(*x);
        }
        Ok(())
    })
}

/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uafkit_grad(
    params: *const UafkitParams,
    x: f64,
    out: *mut UafkitGradient,
) -> UafkitStatus {
    guard(out, || {
        let g = params_in(params)?.grad(x);
        Ok(UafkitGradient {
            d_x: g.d_x,
            d_a: g.d_a,
            d_b: g.d_b,
            d_c: g.d_c,
            d_d: g.d_d,
            d_e: g.d_e,
        })
    })
}

/// Preset parameters by name, e.g. `"tanh"` or `"leaky_relu(0.05)"`.
///
/// # Safety
/// `kind` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uafkit_preset(
    kind: *const c_char,
    out: *mut UafkitParams,
) -> UafkitStatus {
    guard(out, || Ok(preset(kind_in(kind)?)?.into()))
}

/// Exact reference activation.
///
/// # Safety
/// `kind` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uafkit_target_eval(
    kind: *const c_char,
    x: f64,
    out: *mut f64,
) -> UafkitStatus {
    guard(out, || Ok(target_in(kind)?.eval(x)))
}

/// UAF minus target at `x`.
///
/// # Safety
/// Pointers must be valid as in [`uafkit_target_eval`].
#[no_mangle]
pub unsafe extern "C" fn uafkit_approx_error(
    params: *const UafkitParams,
    kind: *const c_char,
    x: f64,
    out: *mut f64,
) -> UafkitStatus {
    guard(out, || {
        Ok(approx_error(&params_in(params)?, &target_in(kind)?, x))
    })
}

/// RMSE over `n` evenly spaced points of `[lo, hi]`.
///
/// # Safety
/// Pointers must be valid as in [`uafkit_target_eval`].
#[no_mangle]
pub unsafe extern "C" fn uafkit_interval_rmse(
    params: *const UafkitParams,
    kind: *const c_char,
    lo: f64,
    hi: f64,
    n: size_t,
    out: *mut f64,
) -> UafkitStatus {
    guard(out, || {
        Ok(interval_rmse(
            &params_in(params)?,
            &target_in(kind)?,
            Interval::new(lo, hi)?,
            n,
        )?)
    })
}

// ---- error reports ----

/// # Safety
/// `out` receives a handle to release with `uafkit_error_report_free`.
#[no_mangle]
pub unsafe extern "C" fn uafkit_error_report(
    params: *const UafkitParams,
    kind: *const c_char,
    lo: f64,
    hi: f64,
    n: size_t,
    out: *mut *mut UafkitErrorReport,
) -> UafkitStatus {
    guard(out, || {
        let r = error_report(
            &params_in(params)?,
            &target_in(kind)?,
            Interval::new(lo, hi)?,
            n,
        )?;
        Ok(Box::into_raw(Box::new(UafkitErrorReport(r))))
    })
}

/// # Safety
/// `report` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uafkit_error_report_max_abs_error(
    report: *const UafkitErrorReport,
    out: *mut f64,
) -> UafkitStatus {
    guard(out, || Ok(handle(report)?.0.max_abs_error))
}

/// # Safety
/// `report` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uafkit_error_report_rmse(
    report: *const UafkitErrorReport,
    out: *mut f64,
) -> UafkitStatus {
    guard(out, || Ok(handle(report)?.0.rmse))
}

/// Number of points where the maximum is attained.
///
/// # Safety
/// `report` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uafkit_error_report_location_count(
    report: *const UafkitErrorReport,
    out: *mut size_t,
) -> UafkitStatus {
    guard(out, || Ok(handle(report)?.0.max_error_locations.len()))
}

/// # Safety
/// `report` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uafkit_error_report_location(
    report: *const UafkitErrorReport,
    index: size_t,
    out: *mut f64,
) -> UafkitStatus {
    guard(out, || {
        let locs = &handle(report)?.0.max_error_locations;
        locs.get(index).copied().ok_or_else(|| {
            Failure(
                UafkitStatus::IndexOutOfRange,
                format!("index {index} of {} locations", locs.len()),
            )
        })
    })
}

/// Full report as JSON; release with `uafkit_string_free`.
///
/// # Safety
/// `report` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uafkit_error_report_to_json(
    report: *const UafkitErrorReport,
    out: *mut *mut c_char,
) -> UafkitStatus {
    guard(out, || json_string(&handle(report)?.0))
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uafkit_error_report_free(report: *mut UafkitErrorReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

// ---- fitting ----

/// Runs a built-in fit: `sigmoid-family`, `tanh-family`,
/// `gaussian-family` or `relu-family`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` receives a handle to
/// release with `uafkit_fit_result_free`.
#[no_mangle]
pub unsafe extern "C" fn uafkit_fit_builtin(
    name: *const c_char,
    out: *mut *mut UafkitFitResult,
) -> UafkitStatus {
    guard(out, || {
        let name = str_in(name, "name")?;
        let spec = FitSpec::builtin(name).ok_or_else(|| {
            Failure(
                UafkitStatus::UnknownKind,
                format!("unknown fit spec `{name}`"),
            )
        })?;
        Ok(Box::into_raw(Box::new(UafkitFitResult(fit(&spec)?))))
    })
}

/// Runs a fit described by FitSpec JSON.
///
/// # Safety
/// As [`uafkit_fit_builtin`].
#[no_mangle]
pub unsafe extern "C" fn uafkit_fit_json(
    spec_json: *const c_char,
    out: *mut *mut UafkitFitResult,
) -> UafkitStatus {
    guard(out, || {
        let spec: FitSpec = json_in(str_in(spec_json, "spec_json")?, "fit spec")?;
        Ok(Box::into_raw(Box::new(UafkitFitResult(fit(&spec)?))))
    })
}

/// # Safety
/// `result` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uafkit_fit_result_params(
    result: *const UafkitFitResult,
    out: *mut UafkitParams,
) -> UafkitStatus {
    guard(out, || Ok(handle(result)?.0.params.into()))
}

/// # Safety
/// `result` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uafkit_fit_result_rmse(
    result: *const UafkitFitResult,
    out: *mut f64,
) -> UafkitStatus {
    guard(out, || Ok(handle(result)?.0.rmse))
}

/// # Safety
/// `result` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uafkit_fit_result_iterations(
    result: *const UafkitFitResult,
    out: *mut size_t,
) -> UafkitStatus {
    guard(out, || Ok(handle(result)?.0.iterations))
}

/// # Safety
/// `result` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uafkit_fit_result_converged(
    result: *const UafkitFitResult,
    out: *mut bool,
) -> UafkitStatus {
    guard(out, || Ok(handle(result)?.0.converged))
}

/// # Safety
/// `result` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uafkit_fit_result_to_json(
    result: *const UafkitFitResult,
    out: *mut *mut c_char,
) -> UafkitStatus {
    guard(out, || json_string(&handle(result)?.0))
}

/// # Safety
/// `result` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uafkit_fit_result_free(result: *mut UafkitFitResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

// ---- training ----

unsafe fn train_on(
    config_json: *const c_char,
    data: impl FnOnce() -> uafkit::Result<Dataset>,
) -> FfiResult<*mut UafkitTrainReport> {
    let cfg: NetworkConfig = json_in(str_in(config_json, "config_json")?, "network config")?;
    let data = data()?;
    Ok(Box::into_raw(Box::new(UafkitTrainReport(train(
        &cfg, &data,
    )?))))
}

/// Trains on the synthetic gas-mixture regression set. Pass `INFINITY`
/// as `snr_db` for noise-free inputs.
///
/// # Safety
/// `config_json` must be a NUL-terminated NetworkConfig JSON string; `out`
/// receives a handle to release with `uafkit_train_report_free`.
#[no_mangle]
pub unsafe extern "C" fn uafkit_train_gas(
    config_json: *const c_char,
    data_seed: u64,
    n_samples: size_t,
    n_channels: size_t,
    n_species: size_t,
    snr_db: f64,
    out: *mut *mut UafkitTrainReport,
) -> UafkitStatus {
    guard(out, || {
        train_on(config_json, || {
            make_gas_analogue(data_seed, n_samples, n_channels, n_species, snr_db)
        })
    })
}

/// Trains on gaussian-cluster classification data.
///
/// # Safety
/// As [`uafkit_train_gas`].
#[no_mangle]
pub unsafe extern "C" fn uafkit_train_blobs(
    config_json: *const c_char,
    data_seed: u64,
    n_samples: size_t,
    n_classes: size_t,
    n_features: size_t,
    spread: f64,
    out: *mut *mut UafkitTrainReport,
) -> UafkitStatus {
    guard(out, || {
        train_on(config_json, || {
            make_blobs(data_seed, n_samples, n_classes, n_features, spread)
        })
    })
}

/// # Safety
/// `report` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uafkit_train_report_epochs(
    report: *const UafkitTrainReport,
    out: *mut size_t,
) -> UafkitStatus {
    guard(out, || Ok(handle(report)?.0.loss_trace.len()))
}

/// Mean training loss of epoch `index` (0-based).
///
/// # Safety
/// `report` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uafkit_train_report_loss(
    report: *const UafkitTrainReport,
    index: size_t,
    out: *mut f64,
) -> UafkitStatus {
    guard(out, || trace_at(&handle(report)?.0.loss_trace, index))
}

/// Validation metric after epoch `index` (0-based): RMSE for regression,
/// accuracy for classification.
///
/// # Safety
/// `report` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uafkit_train_report_metric(
    report: *const UafkitTrainReport,
    index: size_t,
    out: *mut f64,
) -> UafkitStatus {
    guard(out, || trace_at(&handle(report)?.0.metric_trace, index))
}

fn trace_at(trace: &[f64], index: usize) -> FfiResult<f64> {
    trace.get(index).copied().ok_or_else(|| {
        Failure(
            UafkitStatus::IndexOutOfRange,
            format!("epoch index {index} of {}", trace.len()),
        )
    })
}

/// Final shared UAF parameters. Fails with `INVALID_ARGUMENT` when the
/// activation was frozen.
///
/// # Safety
/// `report` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uafkit_train_report_final_uaf(
    report: *const UafkitTrainReport,
    out: *mut UafkitParams,
) -> UafkitStatus {
    guard(out, || {
        handle(report)?
            .0
            .final_uaf()
            .map(Into::into)
            .ok_or_else(|| {
                Failure(
                    UafkitStatus::InvalidArgument,
                    "activation was not trainable".into(),
                )
            })
    })
}

/// # Safety
/// `report` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uafkit_train_report_to_json(
    report: *const UafkitTrainReport,
    out: *mut *mut c_char,
) -> UafkitStatus {
    guard(out, || json_string(&handle(report)?.0))
}

/// Per-epoch CSV trace; release with `uafkit_string_free`.
///
/// # Safety
/// `report` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uafkit_train_report_to_csv(
    report: *const UafkitTrainReport,
    out: *mut *mut c_char,
) -> UafkitStatus {
    guard(out, || {
        CString::new(handle(report)?.0.to_csv())
            .map(CString::into_raw)
            .map_err(|e| Failure(UafkitStatus::InvalidArgument, e.to_string()))
    })
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uafkit_train_report_free(report: *mut UafkitTrainReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
