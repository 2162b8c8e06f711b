//! Batch drivers over the property checks of the sampler, Besov and
//! heat-kernel modules. Failures are collected, never fail-fast.

use std::f64::consts::PI;

use super::config::{ExperimentConfig, ExperimentKind};
use super::report::{CheckResult, Clock, ExperimentReport, SuiteReport};
use crate::besov::{
    besov_norm, bernstein_check, block_orthogonality_residual, interpolation_check, partition_residual_on_grid,
    reconstruction_residual, DriftKind, DriftSpec, DyadicPartition, FieldOnGrid, Mollifier, C_BERNSTEIN,
    C_INTERPOLATION,
};
use crate::error::{Error, Result};
use crate::heat_kernel::{
    block_moment_check, cf_decay_constant, chapman_kolmogorov_residual, gradient_bound_check, mass_check,
    moment_integral_check, standard_test_fields, time_increment_check, KernelGrid, Symbol, C_BLOCK, C_GRAD, C_TIME,
};
use crate::metrics::{linear_fit, Verdict};
use crate::rng::derive_seed;
use crate::sampling::{ecf_grid, max_ecf_deviation, IncrementSampler};
use crate::stable_model::{identity_matrix, ScalingPiece, SpectralMeasure, StableSpec, TimeScaling};

/// Inversion tolerance against closed-form kernels.
pub const INVERSION_TOL: f64 = 1e-8;
pub const SELF_SIMILARITY_TOL: f64 = 1e-7;
pub const MASS_TOL: f64 = 1e-6;
pub const MOMENT_SLOPE_TOL: f64 = 0.1;
pub const SMALL_OVER_MEDIAN: f64 = 4.0;
pub const UNITY_TOL: f64 = 1e-12;
pub const SINGLE_FREQUENCY_TOL: f64 = 1e-10;
pub const ORTHOGONALITY_TOL: f64 = 1e-10;
/// Tolerance on the `‖b_m‖_∞`-bound growth slope `β`.
pub const GROWTH_SLOPE_TOL: f64 = 0.05;
/// Tolerance on the `‖b − b_m‖_{B^{−β−ε}}` decay slope `−ε`.
pub const DECAY_SLOPE_TOL: f64 = 0.1;
/// ECF deviation threshold is `ECF_FACTOR/√N`.
pub const ECF_FACTOR: f64 = 4.0;

#[derive(Default)]
struct Checks {
    list: Vec<CheckResult>,
}

impl Checks {
    /// Records `value ≤ threshold`, or a failure carrying the error.
    fn at_most(&mut self, name: impl Into<String>, threshold: f64, value: Result<f64>) {
        self.custom(name, threshold, value.map(|v| (v, v <= threshold, String::new())));
    }

    fn custom(&mut self, name: impl Into<String>, threshold: f64, outcome: Result<(f64, bool, String)>) {
        let name = name.into();
        let check = match outcome {
            Ok((value, passed, detail)) => CheckResult {
                name,
                value,
                threshold,
                passed: passed && value.is_finite(),
                detail,
            },
            Err(e) => CheckResult {
                name,
                value: f64::NAN,
                threshold,
                passed: false,
                detail: e.to_string(),
            },
        };
        self.list.push(check);
    }
}

/// Runs the property matrix named by `config.kind`.
pub fn run_suite(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let mut clock = Clock::start();
    let mut checks = Checks::default();
    match config.kind {
        ExperimentKind::SamplerSuite => sampler_suite(config, &mut checks, &mut clock),
        ExperimentKind::BesovSuite => besov_suite(config, &mut checks),
        ExperimentKind::KernelSuite => kernel_suite(config, &mut checks, &mut clock)?,
        k => return Err(Error::invalid("kind", format!("{k:?} is not a suite"))),
    }
    let failed = checks.list.iter().filter(|c| !c.passed).count();
    let verdict = if failed == 0 {
        Verdict::Consistent
    } else {
        Verdict::Inconsistent
    };
    let mut report = ExperimentReport::new(config, verdict);
    for c in &checks.list {
        clock.log(format!("{} {}: {:e} (threshold {:e})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.threshold));
    }
    report.suite = Some(SuiteReport {
        kind: config.kind,
        passed: checks.list.len() - failed,
        failed,
        checks: checks.list,
    });
    report.meta = clock.finish();
    Ok(report)
}

/// The three spectral measures of the sampler matrix.
pub fn sampler_measures(d: usize) -> Result<Vec<(&'static str, SpectralMeasure)>> {
    Ok(vec![
        ("uniform", SpectralMeasure::uniform(d, 1.0)?),
        ("cylindrical", SpectralMeasure::cylindrical(d, 1.0)?),
        ("diagonal_pair", SpectralMeasure::symmetric_pairs(&[(vec![1.0; d], 0.5)])?),
    ])
}

/// Time step of the sampler matrix.
pub const SAMPLER_DT: f64 = 0.5;

fn sampler_suite(config: &ExperimentConfig, checks: &mut Checks, clock: &mut Clock) {
    let n = config.paths;
    let threshold = ECF_FACTOR / (n as f64).sqrt();
    let mut index = 0u64;
    for alpha in [1.2, 1.5, 1.8] {
        for d in [1, 2] {
            let measures = match sampler_measures(d) {
                Ok(m) => m,
                Err(e) => {
                    checks.custom(format!("ecf α={alpha} d={d}"), threshold, Err(e));
                    continue;
                }
            };
            for (label, measure) in measures {
                index += 1;
                let name = format!("ecf α={alpha} d={d} {label}");
                let outcome = StableSpec::new(alpha, measure).and_then(|spec| {
                    let sampler = IncrementSampler::law_only(spec.clone());
                    let samples = sampler.sample_population(SAMPLER_DT, n, derive_seed(config.seed, index))?;
                    let target = |xi: &[f64]| num_complex::Complex64::new((-SAMPLER_DT * spec.characteristic_exponent(xi)).exp(), 0.0);
                    Ok(max_ecf_deviation(&samples, d, &ecf_grid(d), target))
                });
                checks.at_most(name, threshold, outcome);
                clock.log(format!("sampler case {index} done"));
            }
        }
    }
}

/// Largest `|‖f‖_{B^s} − 2^{sj}|` over single-frequency fields `cos(2^j x₁)`.
pub fn single_frequency_norm_error(dim: usize, partition: &DyadicPartition, m: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for j in 0..=partition.j_max.min((m as f64 / 4.0).log2() as i32) {
        let k = (j as f64).exp2();
        let f = FieldOnGrid::from_fn(dim, m, 1, |x| (k * x[0]).cos())?;
        for s in [-0.3, 0.0, 0.5] {
            let want = (s * j as f64).exp2();
            worst = worst.max((besov_norm(&f, partition, s)? - want).abs());
        }
    }
    Ok(worst)
}

/// Band-limited test field with content in every block up to `j_max − 1`.
pub fn mixed_field(dim: usize, m: usize, seed: u64) -> Result<FieldOnGrid> {
    let top = ((m as f64 / 8.0).log2() as i32).max(1);
    let b = DriftSpec::synthesize(0.25, top, 1.0, seed, dim, DriftKind::Componentwise)?;
    let f = b.render(m)?;
    Ok(f.into_iter().next().expect("at least one component"))
}

/// Log-log slopes over `m ∈ {2^4, …, 2^10}` of the `‖b_m‖_∞` bound
/// `Σ_j |a_j μ(|k_j|/m)|` and of `‖b − b_m‖_{B^{−β−ε}}`, for the lacunary
/// drift with `J = 20`.
pub fn mollification_slopes(beta: f64, eps: f64, dim: usize) -> Result<(f64, f64)> {
    let b = DriftSpec::synthesize(beta, 20, 1.0, 1, dim, DriftKind::Componentwise)?;
    let mollifier = Mollifier::standard(dim)?;
    let ms: Vec<f64> = (4..=10).map(|p| f64::from(p).exp2()).collect();
    let mut sup = Vec::with_capacity(ms.len());
    let mut diff = Vec::with_capacity(ms.len());
    for &m in &ms {
        let bm = b.mollify(mollifier, m)?;
        sup.push(bm.sup_bound().ln());
        diff.push(b.difference(&bm)?.besov_norm(-beta - eps).ln());
    }
    let x: Vec<f64> = ms.iter().map(|m| m.ln()).collect();
    let w = vec![1.0; x.len()];
    Ok((linear_fit(&x, &sup, &w)?.slope, linear_fit(&x, &diff, &w)?.slope))
}

fn besov_suite(config: &ExperimentConfig, checks: &mut Checks) {
    let d = config.dim();
    let m = if d == 1 { 1024 } else { 128 };
    let partition = DyadicPartition::new(((m / 2) as f64).log2() as i32);
    let radial = (0..=200_000)
        .map(|i| partition.unity_residual(i as f64 * (partition.j_max as f64).exp2() / 200_000.0))
        .fold(0.0, f64::max);
    checks.at_most("partition of unity (radial sweep)", UNITY_TOL, Ok(radial));
    let field = mixed_field(d, m, config.seed);
    match &field {
        Ok(f) => {
            checks.at_most("partition of unity (grid frequencies)", UNITY_TOL, Ok(partition_residual_on_grid(f, &partition)));
            checks.at_most("block orthogonality |i−j| ≥ 2", ORTHOGONALITY_TOL, block_orthogonality_residual(f, &partition));
            checks.at_most("block reconstruction", ORTHOGONALITY_TOL, reconstruction_residual(f, &partition));
            for k in [1, 2] {
                checks.at_most(
                    format!("Bernstein k={k}"),
                    C_BERNSTEIN,
                    bernstein_check(f, &partition, k).map(|r| r.max_ratio),
                );
            }
            checks.at_most(
                "interpolation s₁=−0.5 s₂=0.5",
                C_INTERPOLATION,
                interpolation_check(f, -0.5, 0.5, &partition).map(|r| r.ratio),
            );
        }
        Err(e) => checks.custom("test field", 0.0, Err(Error::NotRepresentable(e.to_string()))),
    }
    checks.at_most(
        "single-frequency Besov norms",
        SINGLE_FREQUENCY_TOL,
        single_frequency_norm_error(d, &partition, m),
    );
    let eps = 0.1;
    for beta in [0.1, 0.2] {
        match mollification_slopes(beta, eps, d) {
            Ok((growth, decay)) => {
                checks.custom(
                    format!("‖b_m‖_∞ bound growth slope β={beta}"),
                    GROWTH_SLOPE_TOL,
                    Ok(((growth - beta).abs(), (growth - beta).abs() <= GROWTH_SLOPE_TOL, format!("slope {growth}"))),
                );
                checks.custom(
                    format!("‖b − b_m‖ decay slope β={beta} ε={eps}"),
                    DECAY_SLOPE_TOL,
                    Ok(((decay + eps).abs(), (decay + eps).abs() <= DECAY_SLOPE_TOL, format!("slope {decay}"))),
                );
            }
            Err(e) => checks.custom(format!("mollification slopes β={beta}"), GROWTH_SLOPE_TOL, Err(e)),
        }
    }
}

/// Largest `|p(t, x) − p_exact(t, x)|` over a few points.
fn inversion_error<F: Fn(f64, &[f64]) -> f64>(grid: &KernelGrid, points: &[(f64, Vec<f64>)], exact: F) -> Result<f64> {
    let mut worst = 0.0f64;
    for (t, x) in points {
        worst = worst.max((grid.density(0.0, *t, x)? - exact(*t, x)).abs());
    }
    Ok(worst)
}

/// `max |p(t, x) − t^{−d/α} p(1, t^{−1/α} x)|` over a few `(t, x)`.
pub fn self_similarity_residual(grid: &KernelGrid) -> Result<f64> {
    let d = grid.dim();
    let alpha = grid.alpha();
    let mut worst = 0.0f64;
    for (t, r) in [(0.3, 0.7), (1.7, -2.0), (0.05, 0.1)] {
        let x: Vec<f64> = (0..d).map(|i| r * (1.0 + 0.3 * i as f64)).collect();
        let lhs = grid.density(0.0, t, &x)?;
        let xs: Vec<f64> = x.iter().map(|v| v * f64::powf(t, -1.0 / alpha)).collect();
        let rhs = f64::powf(t, -(d as f64) / alpha) * grid.density(0.0, 1.0, &xs)?;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

fn kernel_suite(config: &ExperimentConfig, checks: &mut Checks, clock: &mut Clock) -> Result<()> {
    let d = config.dim();
    let spec = config.stable_spec()?;
    let alpha = spec.alpha();

    let cauchy = KernelGrid::for_times(Symbol::cauchy()?, None, 0.5)?;
    let points: Vec<(f64, Vec<f64>)> = [(1.0, 0.0), (1.0, 1.0), (1.0, 2.5), (0.5, 0.3), (2.0, 7.0)]
        .iter()
        .map(|&(t, x)| (t, vec![x]))
        .collect();
    checks.at_most(
        "Cauchy inversion",
        INVERSION_TOL,
        inversion_error(&cauchy, &points, |t, x| t / (PI * (t * t + x[0] * x[0]))),
    );
    let gauss = KernelGrid::for_times(Symbol::gaussian(d, 1.0)?, None, 0.5)?;
    let points: Vec<(f64, Vec<f64>)> = [(1.0, 0.0), (1.0, 1.0), (0.5, 2.0), (2.0, -1.5)]
        .iter()
        .map(|&(t, x)| (t, (0..d).map(|i| x * (1.0 - 0.4 * i as f64)).collect()))
        .collect();
    checks.at_most(
        format!("Gaussian inversion d={d}"),
        INVERSION_TOL,
        inversion_error(&gauss, &points, |t, x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            (4.0 * PI * t).powf(-(d as f64) / 2.0) * (-r2 / (4.0 * t)).exp()
        }),
    );
    clock.log("closed-form inversions done");

    let grid = KernelGrid::for_times(Symbol::Stable(spec.clone()), None, 0.01)?;
    checks.at_most("self-similarity", SELF_SIMILARITY_TOL, self_similarity_residual(&grid));
    for t in [0.1, 1.0] {
        checks.at_most(format!("mass t={t}"), MASS_TOL, mass_check(&grid, 0.0, t).map(|r| (r.mass - 1.0).abs()));
    }
    clock.log("pointwise checks done");

    let ts = [0.01, 0.04, 0.16, 0.64];
    for (k, beta) in [(0, 0.0), (1, 0.0), (1, 0.5 * alpha), (2, 0.5), (2, 1.0)] {
        checks.custom(
            format!("moment integral k={k} β={beta}"),
            MOMENT_SLOPE_TOL,
            moment_integral_check(&grid, &ts, k, beta).map(|r| {
                let gap = (r.slope - r.expected_slope).abs();
                (gap, r.passed, format!("slope {} expected {}", r.slope, r.expected_slope))
            }),
        );
    }
    clock.log("moment integrals done");

    let m = if d == 1 { 4096 } else { 512 };
    let fields = standard_test_fields(d, m)?;
    let semigroup = KernelGrid::new(Symbol::Stable(spec.clone()), None, 1e9, 1024)?;
    for k in [0, 1] {
        let r = gradient_bound_check(&semigroup, &[1e-3, 1e-2, 0.1, 0.5, 1.0], &fields, k);
        let (sup, ratio) = match &r {
            Ok(r) => (Ok(r.sup_q), Ok(r.small_over_median)),
            Err(e) => (Err(Error::NotRepresentable(e.to_string())), Err(Error::NotRepresentable(e.to_string()))),
        };
        checks.at_most(format!("gradient bound Q(t) k={k}"), C_GRAD, sup);
        checks.at_most(format!("gradient small-t/median k={k}"), SMALL_OVER_MEDIAN, ratio);
    }
    for k in [0, 1] {
        let r = time_increment_check(&semigroup, 0.0, &[0.01, 0.1, 0.5], &[0.01, 0.011, 0.02, 0.1, 0.15, 0.5, 1.0], &fields, k);
        let (inc, gen) = match &r {
            Ok(r) => (Ok(r.sup_ratio), Ok(r.generator_sup)),
            Err(e) => (Err(Error::NotRepresentable(e.to_string())), Err(Error::NotRepresentable(e.to_string()))),
        };
        checks.at_most(format!("time increment k={k}"), C_TIME, inc);
        checks.at_most(format!("generator bound k={k}"), C_TIME, gen);
    }
    clock.log("semigroup checks done");

    let partition = DyadicPartition::new(10);
    let js: Vec<i32> = (0..=6).step_by(2).filter(|j| 1.5 * f64::from(*j).exp2() <= grid.cutoff()).collect();
    for (n, gamma, theta) in [(0, 0.0, 0.0), (1, 0.0, 0.0), (0, 0.5, 1.0), (1, 1.0, 1.2)] {
        checks.at_most(
            format!("block moment n={n} γ={gamma} ϑ={theta}"),
            C_BLOCK,
            block_moment_check(&grid, &partition, &js, n, gamma, theta, &[0.01, 0.1, 1.0]).map(|r| r.sup_ratio),
        );
    }
    clock.log("block moments done");

    let mut bent = identity_matrix(d);
    bent[0] = 1.5;
    let scaling = TimeScaling::new(
        d,
        vec![
            ScalingPiece {
                start: 0.0,
                end: 0.5,
                matrix: identity_matrix(d),
            },
            ScalingPiece {
                start: 0.5,
                end: 1.0,
                matrix: bent,
            },
        ],
        2.0,
    )?;
    let scaled = KernelGrid::for_times(Symbol::Stable(spec), Some(scaling), 0.1)?;
    let freqs: Vec<Vec<f64>> = (0..40).map(|i| (0..d).map(|c| (i as f64 * 0.37 + c as f64).sin() * 6.0).collect()).collect();
    checks.at_most(
        "Chapman–Kolmogorov across a scaling break",
        1e-12,
        chapman_kolmogorov_residual(&scaled, 0.1, 0.5, 0.9, &freqs),
    );
    checks.custom(
        "characteristic-function decay",
        0.0,
        cf_decay_constant(&grid, 0.5, 1e3).map(|r| (r.violations as f64, r.violations == 0 && r.c > 0.0, format!("c = {}", r.c))),
    );
    Ok(())
}
