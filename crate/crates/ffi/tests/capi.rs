//! The C interface exercised through its exported symbols.

use std::ffi::{c_char, CStr, CString};
use std::ptr;

use stable_euler_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let len = unsafe { se_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(len > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn uniform(alpha: f64, dim: usize) -> *mut SeStableSpec {
    let mut spec = ptr::null_mut();
    assert_eq!(unsafe { se_spec_new_uniform(alpha, dim, 1.0, &mut spec) }, SeStatus::Ok);
    spec
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(se_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn spec_exponent_and_errors() {
    let spec = uniform(1.5, 2);
    assert_eq!(unsafe { se_spec_dim(spec) }, 2);
    let mut psi = 0.0;
    let xi = [2.0, 0.0];
    assert_eq!(unsafe { se_spec_characteristic_exponent(spec, xi.as_ptr(), 2, &mut psi) }, SeStatus::Ok);
    let mut unit = 0.0;
    let e1 = [1.0, 0.0];
    unsafe { se_spec_characteristic_exponent(spec, e1.as_ptr(), 2, &mut unit) };
    assert!((psi - 2f64.powf(1.5) * unit).abs() < 1e-12 * psi);

    let st = unsafe { se_spec_characteristic_exponent(spec, xi.as_ptr(), 3, &mut psi) };
    assert_eq!(st, SeStatus::InvalidArgument);
    assert!(last_error().contains("components"));
    unsafe { se_spec_free(spec) };

    let mut bad = ptr::null_mut();
    assert_eq!(unsafe { se_spec_new_uniform(2.5, 1, 1.0, &mut bad) }, SeStatus::InvalidArgument);
    assert!(bad.is_null());
    assert_eq!(unsafe { se_spec_new_uniform(1.5, 1, 1.0, ptr::null_mut()) }, SeStatus::NullPointer);
    unsafe { se_spec_free(ptr::null_mut()) };
}

#[test]
fn degenerate_atoms_are_reported() {
    let dirs = [1.0, 0.0, -1.0, 0.0];
    let weights = [1.0, 1.0];
    let mut spec = ptr::null_mut();
    let st = unsafe { se_spec_new_atoms(1.5, 2, dirs.as_ptr(), weights.as_ptr(), 2, &mut spec) };
    assert_eq!(st, SeStatus::Degenerate);
    assert!(spec.is_null());
}

#[test]
fn sampler_fills_buffers_and_reports_size() {
    let spec = uniform(1.7, 2);
    let mut sampler = ptr::null_mut();
    assert_eq!(unsafe { se_sampler_new(spec, &mut sampler) }, SeStatus::Ok);
    unsafe { se_spec_free(spec) };

    let mut needed = 0;
    let mut small = [0.0; 3];
    let st = unsafe { se_sampler_sample(sampler, 0.5, 10, 1, small.as_mut_ptr(), small.len(), &mut needed) };
    assert_eq!(st, SeStatus::BufferTooSmall);
    assert_eq!(needed, 20);

    let mut a = vec![0.0; 20];
    let mut b = vec![0.0; 20];
    unsafe {
        assert_eq!(se_sampler_sample(sampler, 0.5, 10, 1, a.as_mut_ptr(), 20, ptr::null_mut()), SeStatus::Ok);
        assert_eq!(se_sampler_sample(sampler, 0.5, 10, 1, b.as_mut_ptr(), 20, ptr::null_mut()), SeStatus::Ok);
    }
    assert_eq!(a, b);
    assert!(a.iter().all(|v| v.is_finite() && *v != 0.0));
    unsafe { se_sampler_free(sampler) };
}

#[test]
fn drifts_evaluate_and_mollify() {
    let mut sine = ptr::null_mut();
    assert_eq!(unsafe { se_drift_new_sine(1, 2.0, &mut sine) }, SeStatus::Ok);
    let (x, mut out) = ([0.5], [0.0]);
    assert_eq!(unsafe { se_drift_eval(sine, x.as_ptr(), out.as_mut_ptr(), 1) }, SeStatus::Ok);
    assert!((out[0] - 2.0 * 0.5f64.sin()).abs() < 1e-15);
    let mut norm = 0.0;
    assert_eq!(unsafe { se_drift_besov_norm(sine, -0.1, &mut norm) }, SeStatus::InvalidArgument);

    let mut lac = ptr::null_mut();
    assert_eq!(unsafe { se_drift_new_lacunary(0.1, 6, 1.0, 3, 1, false, &mut lac) }, SeStatus::Ok);
    let mut rough = 0.0;
    assert_eq!(unsafe { se_drift_besov_norm(lac, -0.1, &mut rough) }, SeStatus::Ok);
    assert!(rough > 0.0 && rough.is_finite());

    let mut smooth = ptr::null_mut();
    assert_eq!(unsafe { se_drift_mollify(lac, 8.0, &mut smooth) }, SeStatus::Ok);
    let mut mollified = 0.0;
    unsafe { se_drift_besov_norm(smooth, -0.1, &mut mollified) };
    // convolution with a probability density does not increase block norms
    assert!(mollified <= rough * (1.0 + 1e-9), "{mollified} > {rough}");

    let mut nope = ptr::null_mut();
    assert_eq!(unsafe { se_drift_mollify(sine, 8.0, &mut nope) }, SeStatus::InvalidArgument);
    unsafe {
        se_drift_free(smooth);
        se_drift_free(lac);
        se_drift_free(sine);
    }
}

#[test]
fn simulation_is_reproducible() {
    let spec = uniform(1.5, 1);
    let mut sampler = ptr::null_mut();
    let mut drift = ptr::null_mut();
    unsafe {
        se_sampler_new(spec, &mut sampler);
        se_drift_new_sine(1, 1.0, &mut drift);
        se_spec_free(spec);
    }
    let x0 = [0.25];
    let run = |seed: u64| {
        let mut out = vec![0.0; 50];
        let st = unsafe { se_simulate(sampler, drift, 8, 1.0, x0.as_ptr(), 50, seed, out.as_mut_ptr(), 50, ptr::null_mut()) };
        assert_eq!(st, SeStatus::Ok);
        out
    };
    assert_eq!(run(4), run(4));
    assert_ne!(run(4), run(5));

    let mut wrong = ptr::null_mut();
    unsafe { se_drift_new_sine(2, 1.0, &mut wrong) };
    let mut out = vec![0.0; 100];
    let st = unsafe { se_simulate(sampler, wrong, 8, 1.0, ptr::null(), 50, 0, out.as_mut_ptr(), 100, ptr::null_mut()) };
    assert_eq!(st, SeStatus::InvalidArgument);
    unsafe {
        se_drift_free(wrong);
        se_drift_free(drift);
        se_sampler_free(sampler);
    }
}

#[test]
fn exponent_matches_the_bounded_order() {
    let mut e = 0.0;
    assert_eq!(unsafe { se_theoretical_exponent(1.5, 0.0, 0.0, 0.0, 0.0, SeRegime::Bounded, &mut e) }, SeStatus::Ok);
    assert!((e + 1.0 / 3.0).abs() < 1e-15);
    let st = unsafe { se_theoretical_exponent(1.6, 0.1, 0.625, 0.0, 0.0, SeRegime::DistI, &mut e) };
    assert_eq!(st, SeStatus::InvalidArgument);
}

#[test]
fn experiment_round_trip() {
    let config = CString::new(
        r#"{ "kind": "bounded_rate", "alpha": 1.5, "paths": 300, "seed": 2,
             "measure": { "variant": "uniform", "dim": 1, "mass": 1.0 },
             "drift": { "type": "zero" }, "n_ladder": [4, 8, 16, 32] }"#,
    )
    .unwrap();
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { se_experiment_run(config.as_ptr(), &mut report) }, SeStatus::Ok);

    let mut verdict = SeVerdict::Consistent;
    assert_eq!(unsafe { se_report_verdict(report, &mut verdict) }, SeStatus::Ok);
    assert_eq!(verdict, SeVerdict::Inconclusive);
    let mut slope = 0.0;
    unsafe { se_report_slope(report, &mut slope) };
    assert!(slope.is_nan());

    let mut needed = 0;
    let st = unsafe { se_report_json(report, ptr::null_mut(), 0, &mut needed) };
    assert_eq!(st, SeStatus::BufferTooSmall);
    let mut buf = vec![0 as c_char; needed];
    assert_eq!(unsafe { se_report_json(report, buf.as_mut_ptr(), needed, ptr::null_mut()) }, SeStatus::Ok);
    let json = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
    assert!(json.contains("bounded_rate"), "{json}");

    let dir = std::env::temp_dir().join(format!("se-ffi-{}", std::process::id()));
    let cdir = CString::new(dir.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { se_report_write(report, cdir.as_ptr()) }, SeStatus::Ok);
    assert!(dir.join("report.json").exists());
    std::fs::remove_dir_all(&dir).unwrap();
    unsafe { se_report_free(report) };

    let bad = CString::new(r#"{ "kind": "bounded_rate" }"#).unwrap();
    let mut none = ptr::null_mut();
    assert_eq!(unsafe { se_experiment_run(bad.as_ptr(), &mut none) }, SeStatus::InvalidArgument);
    assert!(none.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn header_declares_every_entry_point() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/stable_euler.h")).unwrap();
    for name in [
        "se_last_error_message",
        "se_spec_new_uniform",
        "se_spec_new_atoms",
        "se_sampler_sample",
        "se_drift_mollify",
        "se_simulate",
        "se_experiment_run",
        "se_report_json",
        "SE_STATUS_BUFFER_TOO_SMALL",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
