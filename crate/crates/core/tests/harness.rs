//! Experiment configuration, drivers and the command-line tool.

use std::path::Path;
use std::process::Command;

use stable_euler::harness::{run, run_suite, ExperimentConfig, ExperimentKind, Estimator};
use stable_euler::metrics::Verdict;

fn base(kind: &str, extra: &str) -> String {
    format!(
        r#"{{
  "kind": "{kind}",
  "alpha": 1.6,
  "measure": {{ "variant": "uniform", "dim": 1, "mass": 1.0 }},
  "paths": 2000,
  "seed": 3{extra}
}}"#
    )
}

fn rejection(text: &str) -> String {
    ExperimentConfig::from_json(text).expect_err("config must be rejected").to_string()
}

#[test]
fn shipped_configs_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        seen += 1;
    }
    assert!(seen >= 7);
}

#[test]
fn rejections_name_the_violated_inequality() {
    let lac = r#", "drift": { "type": "lacunary", "beta": 0.1, "levels": 6 }, "n_ladder": [8, 16, 32, 64]"#;

    // γ at the open upper end (α−1)/(2αβ) of regime (i)
    let g_max = 0.6 / (2.0 * 1.6 * 0.1);
    let msg = rejection(&base("dist_rate_i", &format!("{lac}, \"gamma\": {g_max}")));
    assert!(msg.contains("γ <"), "{msg}");

    let msg = rejection(&base(
        "dist_rate_i",
        r#", "drift": { "type": "lacunary", "beta": 0.35, "levels": 6 }, "n_ladder": [8, 16], "gamma": 0.5"#,
    ));
    assert!(msg.contains("β < (α−1)/2"), "{msg}");

    let msg = rejection(&base("bounded_rate", r#", "drift": { "type": "sine", "amplitude": 1.0 }, "n_ladder": [16, 8]"#));
    assert!(msg.contains("increasing"), "{msg}");

    let msg = rejection(&base("bounded_rate", r#", "drift": { "type": "sine", "amplitude": 1.0 }, "n_ladder": [5, 7]"#));
    assert!(msg.contains("divide"), "{msg}");

    let msg = rejection(&base("dist_rate_ii", &format!("{lac}, \"gamma\": 0.5")));
    assert!(msg.contains("divergence"), "{msg}");

    let msg = rejection(&base("bounded_rate", r#", "drift": { "type": "sine", "amplitude": 1.0 }, "n_ladder": [8], "x0": [0.0, 1.0]"#));
    assert!(msg.contains("x0"), "{msg}");

    let msg = rejection(&base("bounded_rate", r#", "alpha_typo": 1"#));
    assert!(msg.contains("alpha_typo"), "{msg}");

    let degenerate = r#"{ "kind": "kernel_suite", "alpha": 1.5, "paths": 2, "seed": 0,
        "measure": { "variant": "atoms", "atoms": [{ "dir": [1.0, 0.0], "w": 1.0 }, { "dir": [-1.0, 0.0], "w": 1.0 }] } }"#;
    let msg = rejection(degenerate);
    assert!(msg.contains("degenerate"), "{msg}");
}

#[test]
fn regime_two_admits_its_closed_endpoint() {
    let text = r#"{ "kind": "dist_rate_ii", "alpha": 1.6, "paths": 100, "seed": 0,
        "measure": { "variant": "uniform", "dim": 2, "mass": 1.0 },
        "drift": { "type": "lacunary", "beta": 0.3, "levels": 4, "divergence_free": true },
        "n_ladder": [4, 8], "gamma": 0.5 }"#;
    ExperimentConfig::from_json(text).unwrap();
}

#[test]
fn exact_drifts_are_inconclusive() {
    // the scheme is exact for b ≡ 0 and b ≡ c: every level equals the reference
    for drift in [r#"{ "type": "zero" }"#, r#"{ "type": "constant", "value": [0.7] }"#] {
        let text = base("bounded_rate", &format!(r#", "drift": {drift}, "n_ladder": [8, 16, 32, 64]"#));
        let report = run(&ExperimentConfig::from_json(&text).unwrap()).unwrap();
        assert_eq!(report.verdict, Verdict::Inconclusive, "{drift}");
        let fit = report.fit.as_ref().unwrap();
        assert_eq!(fit.used(), 0, "{drift}: {:?}", fit.points);
        for row in report.rows_of(Estimator::Dictionary) {
            assert!(row.error < 1e-12, "{drift}: {row:?}");
        }
    }
}

#[test]
fn dictionary_gaps_are_bounded() {
    let text = base("bounded_rate", r#", "drift": { "type": "sine", "amplitude": 2.0 }, "n_ladder": [2, 4, 8]"#);
    let report = run(&ExperimentConfig::from_json(&text).unwrap()).unwrap();
    for row in &report.rows {
        assert!(row.error >= 0.0 && row.error <= 2.0, "{row:?}");
    }
    for row in report.rows_of(Estimator::Histogram) {
        assert!(row.error <= 1.0, "{row:?}");
    }
}

#[test]
fn reports_regenerate_byte_for_byte() {
    let text = base(
        "dist_rate_i",
        r#", "drift": { "type": "lacunary", "beta": 0.1, "levels": 5 }, "n_ladder": [4, 8, 16], "gamma": 0.625, "save_samples": true"#,
    );
    let config = ExperimentConfig::from_json(&text).unwrap();
    let a = run(&config).unwrap();
    let b = run(&config).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.errors_csv(), b.errors_csv());

    let dir = tempfile::tempdir().unwrap();
    a.write_to(dir.path()).unwrap();
    for f in ["report.json", "errors.csv", "meta.json", "log.txt", "samples-8.bin", "samples-ref-256.bin"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let bytes = std::fs::read(dir.path().join("samples-8.bin")).unwrap();
    let (samples, d, t) = stable_euler::euler::read_binary(&bytes[..]).unwrap();
    assert_eq!((d, t, samples.len()), (1, 1.0, 2000));
}

#[test]
fn besov_suite_reports_every_check() {
    let config = ExperimentConfig::suite(
        ExperimentKind::BesovSuite,
        1.5,
        stable_euler::stable_model::SpectralMeasure::uniform(1, 1.0).unwrap(),
        2,
        0,
    );
    let report = run_suite(&config).unwrap();
    let suite = report.suite.unwrap();
    assert_eq!(suite.passed + suite.failed, suite.checks.len());
    for name in ["partition of unity (radial sweep)", "block orthogonality |i−j| ≥ 2", "single-frequency Besov norms"] {
        let c = suite.checks.iter().find(|c| c.name == name).unwrap_or_else(|| panic!("{name} missing"));
        assert!(c.passed, "{c:?}");
    }
}

fn tool() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stable-euler"))
}

#[test]
fn exponent_subcommand_prints_the_prediction() {
    let out = tool().args(["exponent", "--alpha", "1.5", "--regime", "bounded"]).output().unwrap();
    assert!(out.status.success());
    let v: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!((v + 1.0 / 3.0).abs() < 1e-15);

    let out = tool()
        .args(["exponent", "--alpha", "1.6", "--beta", "0.1", "--gamma", "0.625", "--regime", "dist-i"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("θ"));
}

#[test]
fn exit_codes_follow_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, base("bounded_rate", r#", "n_ladder": [8, 8]"#)).unwrap();
    let out = tool().args(["rates", "--config"]).arg(&bad).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let good = dir.path().join("zero.json");
    std::fs::write(&good, base("bounded_rate", r#", "n_ladder": [4, 8, 16, 32]"#)).unwrap();
    let out_dir = dir.path().join("zero");
    let out = tool()
        .args(["--threads", "2", "rates", "--paths", "500", "--config"])
        .arg(&good)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout).unwrap().contains("Inconclusive"));
    assert!(out_dir.join("report.json").exists());

    let out = tool().args(["stability", "--config"]).arg(&good).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn finer_reference_moves_errors_within_noise() {
    // the reference at 8·max(n) is already converged relative to Monte Carlo noise
    let errors = |multiplier: u64| {
        let text = base(
            "bounded_rate",
            &format!(r#", "drift": {{ "type": "sine", "amplitude": 1.0 }}, "n_ladder": [4, 8, 16], "reference_multiplier": {multiplier}"#),
        );
        let mut config = ExperimentConfig::from_json(&text).unwrap();
        config.paths = 20_000;
        run(&config).unwrap().rows_of(Estimator::Dictionary).cloned().collect::<Vec<_>>()
    };
    let (coarse, fine) = (errors(8), errors(16));
    for (a, b) in coarse.iter().zip(&fine) {
        let ci = a.ci_independent.unwrap().max(b.ci_independent.unwrap());
        assert!((a.error - b.error).abs() <= ci, "n = {}: {} vs {} (ci {ci})", a.n, a.error, b.error);
    }
}
