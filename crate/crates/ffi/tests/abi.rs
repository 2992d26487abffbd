use std::ffi::{CStr, CString};
use std::ptr;

use uafkit_ffi::*;

fn cs(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(uafkit_last_error()) }
        .to_str()
        .unwrap()
        .to_string()
}

fn preset(name: &str) -> UafkitParams {
    let mut p = UafkitParams {
        a: 0.0,
        b: 0.0,
        c: 0.0,
        d: 0.0,
        e: 0.0,
    };
    assert_eq!(
        unsafe { uafkit_preset(cs(name).as_ptr(), &mut p) },
        UafkitStatus::Ok
    );
    p
}

unsafe fn take_string(s: *mut libc::c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_string();
    uafkit_string_free(s);
    out
}

#[test]
fn evaluation_matches_core() {
    let p = preset("sigmoid");
    let core = uafkit::preset(uafkit::PresetKind::Sigmoid).unwrap();
    let mut y = 0.0;
    unsafe {
        assert_eq!(uafkit_eval_stable(&p, 0.7, &mut y), UafkitStatus::Ok);
        assert_eq!(y, core.eval(0.7));
        assert_eq!(uafkit_eval_naive(&p, 0.7, &mut y), UafkitStatus::Ok);
        assert!((y - core.eval(0.7)).abs() < 1e-12);

        let xs = [-2.0, 0.0, 3.5];
        let mut ys = [0.0; 3];
        assert_eq!(
            uafkit_eval_batch(&p, xs.as_ptr(), 3, ys.as_mut_ptr()),
            UafkitStatus::Ok
        );
        for (x, y) in xs.iter().zip(ys) {
            assert_eq!(y, core.eval(*x));
        }

        let mut g = UafkitGradient::default();
        assert_eq!(uafkit_grad(&p, 0.7, &mut g), UafkitStatus::Ok);
        assert_eq!(g.d_a, core.grad(0.7).d_a);
        assert_eq!(g.d_e, 1.0);
    }
}

#[test]
fn overflow_and_bad_input_codes() {
    let steep = UafkitParams {
        a: 1000.0,
        b: 0.0,
        c: 0.0,
        d: 0.0,
        e: 0.0,
    };
    let mut y = 0.0;
    unsafe {
        assert_eq!(
            uafkit_eval_naive(&steep, 5.0, &mut y),
            UafkitStatus::Overflow
        );
        assert!(!last_error().is_empty());
        assert_eq!(uafkit_eval_stable(&steep, 5.0, &mut y), UafkitStatus::Ok);
        assert_eq!(y, 5000.0 - std::f64::consts::LN_2);
        assert!(last_error().is_empty());

        let nan = UafkitParams {
            a: f64::NAN,
            b: 0.0,
            c: 0.0,
            d: 0.0,
            e: 0.0,
        };
        assert_eq!(
            uafkit_eval_stable(&nan, 0.0, &mut y),
            UafkitStatus::InvalidArgument
        );
        assert_eq!(
            uafkit_eval_stable(ptr::null(), 0.0, &mut y),
            UafkitStatus::NullPointer
        );

        let mut p = steep;
        assert_eq!(
            uafkit_preset(cs("cosine").as_ptr(), &mut p),
            UafkitStatus::UnknownKind
        );
        assert_eq!(
            uafkit_preset(cs("leaky_relu(0.5)").as_ptr(), &mut p),
            UafkitStatus::InvalidArgument
        );
        assert_eq!(p, steep, "output untouched on failure");
    }
}

#[test]
fn targets_and_rmse() {
    let p = preset("identity");
    let mut y = 0.0;
    unsafe {
        assert_eq!(
            uafkit_target_eval(cs("step").as_ptr(), 0.0, &mut y),
            UafkitStatus::Ok
        );
        assert_eq!(y, 0.5);
        assert_eq!(
            uafkit_approx_error(&p, cs("identity").as_ptr(), 3.0, &mut y),
            UafkitStatus::Ok
        );
        assert_eq!(y, 0.0);
        let tanh = preset("tanh");
        assert_eq!(
            uafkit_interval_rmse(&tanh, cs("tanh").as_ptr(), -10.0, 10.0, 2001, &mut y),
            UafkitStatus::Ok
        );
        assert!((y - 0.0016).abs() < 1e-4);
        assert_eq!(
            uafkit_interval_rmse(&tanh, cs("tanh").as_ptr(), 1.0, -1.0, 2001, &mut y),
            UafkitStatus::InvalidArgument
        );
    }
}

#[test]
fn error_report_handle() {
    let p = preset("tanh");
    let mut report = ptr::null_mut();
    unsafe {
        assert_eq!(
            uafkit_error_report(&p, cs("tanh").as_ptr(), -10.0, 10.0, 2001, &mut report),
            UafkitStatus::Ok
        );
        let mut max = 0.0;
        assert_eq!(
            uafkit_error_report_max_abs_error(report, &mut max),
            UafkitStatus::Ok
        );
        assert!((max - 0.004719).abs() < 1e-5);
        let mut n = 0;
        assert_eq!(
            uafkit_error_report_location_count(report, &mut n),
            UafkitStatus::Ok
        );
        assert_eq!(n, 2);
        let mut loc = 0.0;
        assert_eq!(
            uafkit_error_report_location(report, 1, &mut loc),
            UafkitStatus::Ok
        );
        assert!((loc - 0.4355).abs() < 1e-3);
        assert_eq!(
            uafkit_error_report_location(report, 2, &mut loc),
            UafkitStatus::IndexOutOfRange
        );

        let mut json = ptr::null_mut();
        assert_eq!(
            uafkit_error_report_to_json(report, &mut json),
            UafkitStatus::Ok
        );
        let parsed: uafkit::ErrorReport = serde_json::from_str(&take_string(json)).unwrap();
        assert_eq!(parsed.max_abs_error, max);
        uafkit_error_report_free(report);
        uafkit_error_report_free(ptr::null_mut());
    }
}

#[test]
fn fit_handles() {
    let mut result = ptr::null_mut();
    unsafe {
        assert_eq!(
            uafkit_fit_builtin(cs("sigmoid-family").as_ptr(), &mut result),
            UafkitStatus::Ok
        );
        let mut p = preset("identity");
        assert_eq!(uafkit_fit_result_params(result, &mut p), UafkitStatus::Ok);
        assert!((p.a - 1.01605291).abs() < 1e-4);
        assert_eq!(p.d, p.a);
        let mut converged = false;
        assert_eq!(
            uafkit_fit_result_converged(result, &mut converged),
            UafkitStatus::Ok
        );
        assert!(converged);
        let mut iters = 0;
        assert_eq!(
            uafkit_fit_result_iterations(result, &mut iters),
            UafkitStatus::Ok
        );
        let mut json = ptr::null_mut();
        assert_eq!(
            uafkit_fit_result_to_json(result, &mut json),
            UafkitStatus::Ok
        );
        assert!(take_string(json).contains("\"rmse\""));
        uafkit_fit_result_free(result);

        let spec =
            r#"{"target":{"kind":"softplus"},"free":["E"],"init":{"A":1,"B":0,"C":0,"D":0,"E":0}}"#;
        assert_eq!(
            uafkit_fit_json(cs(spec).as_ptr(), &mut result),
            UafkitStatus::Ok
        );
        let mut rmse = 1.0;
        assert_eq!(uafkit_fit_result_rmse(result, &mut rmse), UafkitStatus::Ok);
        assert!(rmse < 1e-3);
        uafkit_fit_result_free(result);

        assert_eq!(
            uafkit_fit_json(cs("{").as_ptr(), &mut result),
            UafkitStatus::InvalidJson
        );
        assert_eq!(
            uafkit_fit_builtin(cs("cosine-family").as_ptr(), &mut result),
            UafkitStatus::UnknownKind
        );
    }
}

const CONFIG: &str = r#"{
  "layer_sizes": [8, 6, 3],
  "activation": {"trainable_uaf": {"init": {"A":1,"B":0,"C":0,"D":-1,"E":0}}},
  "use_batch_norm": [true],
  "seed": 1,
  "optimizer": {"kind": "adam", "lr": 0.01},
  "batch_size": 16,
  "epochs": 3
}"#;

#[test]
fn train_handles() {
    let mut report = ptr::null_mut();
    unsafe {
        assert_eq!(
            uafkit_train_gas(cs(CONFIG).as_ptr(), 0, 200, 8, 3, 30.0, &mut report),
            UafkitStatus::Ok,
            "{}",
            last_error()
        );
        let mut epochs = 0;
        assert_eq!(
            uafkit_train_report_epochs(report, &mut epochs),
            UafkitStatus::Ok
        );
        assert_eq!(epochs, 3);
        let mut v = 0.0;
        assert_eq!(
            uafkit_train_report_loss(report, 2, &mut v),
            UafkitStatus::Ok
        );
        assert!(v.is_finite() && v > 0.0);
        assert_eq!(
            uafkit_train_report_metric(report, 3, &mut v),
            UafkitStatus::IndexOutOfRange
        );
        let mut p = preset("identity");
        assert_eq!(
            uafkit_train_report_final_uaf(report, &mut p),
            UafkitStatus::Ok
        );
        let mut csv = ptr::null_mut();
        assert_eq!(
            uafkit_train_report_to_csv(report, &mut csv),
            UafkitStatus::Ok
        );
        assert_eq!(take_string(csv).lines().count(), 4);
        let mut json = ptr::null_mut();
        assert_eq!(
            uafkit_train_report_to_json(report, &mut json),
            UafkitStatus::Ok
        );
        assert!(take_string(json).contains("uaf_trajectory"));
        uafkit_train_report_free(report);

        // config expects 8 inputs; blobs with 5 features do not fit
        assert_eq!(
            uafkit_train_blobs(cs(CONFIG).as_ptr(), 0, 100, 3, 5, 1.0, &mut report),
            UafkitStatus::InvalidArgument
        );
        assert!(last_error().contains("8"));
        assert_eq!(
            uafkit_train_blobs(cs(CONFIG).as_ptr(), 0, 100, 3, 8, 1.0, &mut report),
            UafkitStatus::Ok
        );
        let mut p = preset("identity");
        let fixed = CONFIG.replace(
            r#"{"trainable_uaf": {"init": {"A":1,"B":0,"C":0,"D":-1,"E":0}}}"#,
            r#"{"fixed": {"preset": {"kind": "tanh"}}}"#,
        );
        uafkit_train_report_free(report);
        assert_eq!(
            uafkit_train_blobs(cs(&fixed).as_ptr(), 0, 100, 3, 8, 1.0, &mut report),
            UafkitStatus::Ok,
            "{}",
            last_error()
        );
        assert_eq!(
            uafkit_train_report_final_uaf(report, &mut p),
            UafkitStatus::InvalidArgument
        );
        uafkit_train_report_free(report);
    }
}

#[test]
fn header_declares_the_abi() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/uafkit.h")).unwrap();
    for name in [
        "#ifndef UAFKIT_H",
        "typedef struct UafkitErrorReport UafkitErrorReport;",
        "UAFKIT_STATUS_OVERFLOW = 4",
        "uafkit_eval_stable(",
        "uafkit_fit_builtin(",
        "uafkit_train_gas(",
        "uafkit_train_report_free(",
        "uafkit_string_free(",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}
