//! Rate, moment and stability experiments.

use super::config::{power_of_two_level, ExperimentConfig, ExperimentKind};
use super::report::{
    Clock, ErrorRow, Estimator, ExperimentReport, SampleSet, ScaleProbe, StabilityRow, StabilitySummary,
};
use super::suites::run_suite;
use crate::besov::Mollifier;
use crate::error::{Error, Result};
use crate::euler::{increment_moment_check, simulate_coupled, simulate_population, CompiledDrift, CoupledLevel, Drift, EulerConfig};
use crate::metrics::{
    fit_rate, linear_fit, spearman, tv_histogram, weak_error, weak_error_paired, EmpiricalLaw, RatePoint,
    TestDictionary, Verdict, MIN_FIT_POINTS, NOISE_FLOOR, ROUNDOFF_FLOOR,
};
use crate::sampling::IncrementSampler;

/// Tolerance of the moment-check slope.
pub const MOMENT_SLOPE_TOL: f64 = 0.1;
/// Spearman threshold of the stability probe.
pub const STABILITY_SPEARMAN: f64 = 0.9;

/// Runs the experiment named by `config.kind`.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    match config.kind {
        ExperimentKind::BoundedRate => run_bounded_rate(config),
        ExperimentKind::DistRateI | ExperimentKind::DistRateIi => run_dist_rate(config),
        ExperimentKind::MomentCheck => run_moment_check(config),
        ExperimentKind::StabilityProbe => run_stability_probe(config),
        ExperimentKind::KernelSuite | ExperimentKind::BesovSuite | ExperimentKind::SamplerSuite => run_suite(config),
    }
}

fn expect_kind(config: &ExperimentConfig, kinds: &[ExperimentKind]) -> Result<()> {
    if kinds.contains(&config.kind) {
        config.validate()
    } else {
        Err(Error::invalid("kind", format!("{:?} is not handled by this runner", config.kind)))
    }
}

fn scheme_config(config: &ExperimentConfig, n: u64) -> EulerConfig {
    EulerConfig {
        n,
        horizon: config.observation_time(),
        x0: config.initial_point(),
        paths: config.paths,
        master_seed: config.seed,
    }
}

fn histogram_bins(dim: usize) -> usize {
    if dim == 1 {
        200
    } else {
        40
    }
}

fn partial_slopes(rows: &mut [ErrorRow]) {
    for i in 1..rows.len() {
        let (a, b) = (&rows[i - 1], &rows[i]);
        rows[i].slope_partial = (a.error > 0.0 && b.error > 0.0)
            .then(|| (b.error / a.error).ln() / (b.n as f64 / a.n as f64).ln());
    }
}

/// Dictionary and histogram rows of a ladder measured against `reference`.
fn ladder_rows(
    ns: &[u64],
    ms: Option<&[f64]>,
    laws: &[EmpiricalLaw],
    reference: &EmpiricalLaw,
    estimator: Estimator,
) -> Result<(Vec<ErrorRow>, Vec<ErrorRow>)> {
    let dict = TestDictionary::standard(reference)?;
    let mut dict_rows = Vec::with_capacity(ns.len());
    let mut hist_rows = Vec::with_capacity(ns.len());
    for (i, (n, law)) in ns.iter().zip(laws).enumerate() {
        let m = ms.map(|v| v[i]);
        let paired = weak_error_paired(law, reference, &dict)?;
        let independent = weak_error(law, reference, &dict)?;
        dict_rows.push(ErrorRow {
            n: *n,
            m,
            error: paired.max_gap,
            ci: Some(paired.ci),
            ci_independent: Some(independent.gaps[paired.argmax].1),
            estimator,
            slope_partial: None,
            witness: Some(paired.label),
        });
        if estimator == Estimator::Dictionary {
            let tv = tv_histogram(law, reference, histogram_bins(law.dim))?;
            hist_rows.push(ErrorRow {
                n: *n,
                m,
                error: tv.tv,
                ci: None,
                ci_independent: None,
                estimator: Estimator::Histogram,
                slope_partial: None,
                witness: None,
            });
        }
    }
    partial_slopes(&mut dict_rows);
    partial_slopes(&mut hist_rows);
    Ok((dict_rows, hist_rows))
}

fn rate_points(rows: &[ErrorRow]) -> Vec<RatePoint> {
    rows.iter()
        .map(|r| RatePoint {
            n: r.n as f64,
            error: r.error,
            ci: r.ci.unwrap_or(0.0),
        })
        .collect()
}

fn laws_of(levels: Vec<(u64, Vec<f64>)>, dim: usize, time: f64, hash: &str) -> Result<Vec<EmpiricalLaw>> {
    levels
        .into_iter()
        .map(|(_, s)| Ok(EmpiricalLaw::new(s, dim, time)?.with_provenance(hash.to_string())))
        .collect()
}

fn keep_samples(report: &mut ExperimentReport, label: String, law: &EmpiricalLaw) {
    report.samples.push(SampleSet {
        label,
        dim: law.dim,
        time: law.time,
        data: law.samples.clone(),
    });
}

/// Bounded closed-form drift: weak error of each `n` against `n_ref` on
/// common noise, fitted slope against `−min(δ, δ/α, (α−1)/α)`.
pub fn run_bounded_rate(config: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_kind(config, &[ExperimentKind::BoundedRate])?;
    let mut clock = Clock::start();
    let d = config.dim();
    let t = config.observation_time();
    let sampler = IncrementSampler::new(config.stable_spec()?)?;
    let drift = config.drift.bounded(d)?;
    let scaled = config.drift_scale_probe.map(|l| config.drift.scaled(l).bounded(d)).transpose()?;
    let n_ref = config.n_ref();
    let ns = &config.n_ladder;
    let mut levels: Vec<CoupledLevel> = ns.iter().map(|&n| CoupledLevel { n, drift: drift.as_ref() }).collect();
    if let Some(s) = &scaled {
        levels.extend(ns.iter().map(|&n| CoupledLevel { n, drift: s.as_ref() }));
        levels.push(CoupledLevel { n: n_ref, drift: s.as_ref() });
    }
    clock.log(format!("bounded rate: N = {}, n = {ns:?}, n_ref = {n_ref}", config.paths));
    let run = simulate_coupled(&scheme_config(config, n_ref), &sampler, drift.as_ref(), &levels)?;
    clock.log("simulation done");

    let mut report = ExperimentReport::new(config, Verdict::Inconclusive);
    let hash = report.config_hash.clone();
    let reference = EmpiricalLaw::new(run.reference, d, t)?.with_provenance(hash.clone());
    let laws = laws_of(run.levels, d, t, &hash)?;
    let k = ns.len();
    let (rows, hist) = ladder_rows(ns, None, &laws[..k], &reference, Estimator::Dictionary)?;
    let fit = fit_rate(&rate_points(&rows))?;
    let theory = config.theoretical_exponent()?.expect("rate kinds have an exponent");
    report.verdict = fit.verdict_upper(theory, config.slack);

    if let Some(scale) = config.drift_scale_probe {
        let (probe_rows, _) = ladder_rows(ns, None, &laws[k..2 * k], &laws[2 * k], Estimator::DictionaryScaled)?;
        let errors: Vec<(u64, f64, f64)> = rows.iter().zip(&probe_rows).map(|(a, b)| (a.n, a.error, b.error)).collect();
        report.scale_probe = Some(ScaleProbe {
            scale,
            increased: errors.iter().all(|e| e.2 > e.1),
            errors,
        });
        report.rows.extend(probe_rows);
    }
    if config.save_samples {
        keep_samples(&mut report, format!("ref-{n_ref}"), &reference);
        for (n, law) in ns.iter().zip(&laws) {
            keep_samples(&mut report, n.to_string(), law);
        }
    }
    report.rows.splice(0..0, rows.into_iter().chain(hist));
    report.n_ref = Some(n_ref);
    report.fit = Some(fit);
    report.theoretical_exponent = Some(theory);
    clock.log(format!("verdict {:?}", report.verdict));
    report.meta = clock.finish();
    Ok(report)
}

/// Distributional drift: the scheme at `n` runs with `b_m`, `m = n^γ`
/// rounded to a power of two, against `(n_ref, m_ref)` on common noise.
pub fn run_dist_rate(config: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_kind(config, &[ExperimentKind::DistRateI, ExperimentKind::DistRateIi])?;
    let mut clock = Clock::start();
    let d = config.dim();
    let t = config.observation_time();
    let gamma = config.gamma.expect("validated");
    let sampler = IncrementSampler::new(config.stable_spec()?)?;
    let n_ref = config.n_ref();
    let ns = &config.n_ladder;
    let m_exact: Vec<f64> = ns.iter().map(|&n| (n as f64).powf(gamma)).collect();
    let ms: Vec<f64> = m_exact.iter().map(|&m| power_of_two_level(m)).collect();
    let m_ref = power_of_two_level((n_ref as f64).powf(gamma));
    let drifts: Vec<CompiledDrift> = ms.iter().map(|&m| config.drift.mollified(d, m)).collect::<Result<_>>()?;
    let reference_drift = config.drift.mollified(d, m_ref)?;
    let levels: Vec<CoupledLevel> =
        ns.iter().zip(&drifts).map(|(&n, b)| CoupledLevel { n, drift: b as &dyn Drift }).collect();
    clock.log(format!("dist rate: N = {}, n = {ns:?}, m = {ms:?}, n_ref = {n_ref}, m_ref = {m_ref}", config.paths));
    let run = simulate_coupled(&scheme_config(config, n_ref), &sampler, &reference_drift, &levels)?;
    clock.log("simulation done");

    let mut report = ExperimentReport::new(config, Verdict::Inconclusive);
    let hash = report.config_hash.clone();
    let reference = EmpiricalLaw::new(run.reference, d, t)?.with_provenance(hash.clone());
    let laws = laws_of(run.levels, d, t, &hash)?;
    let (rows, hist) = ladder_rows(ns, Some(&ms), &laws, &reference, Estimator::Dictionary)?;
    let fit = fit_rate(&rate_points(&rows))?;
    let theory = config.theoretical_exponent()?.expect("rate kinds have an exponent");
    report.verdict = fit.verdict_upper(theory, config.slack);
    for ((n, exact), used) in ns.iter().zip(&m_exact).zip(&ms) {
        report.notes.push(format!("n = {n}: m = n^γ = {exact:.4} rounded to {used}"));
    }
    report.notes.push(format!(
        "n_ref = {n_ref}: m_ref = {:.4} rounded to {m_ref}",
        (n_ref as f64).powf(gamma)
    ));
    if config.save_samples {
        keep_samples(&mut report, format!("ref-{n_ref}"), &reference);
        for (n, law) in ns.iter().zip(&laws) {
            keep_samples(&mut report, n.to_string(), law);
        }
    }
    report.rows = rows.into_iter().chain(hist).collect();
    report.n_ref = Some(n_ref);
    report.m_ref = Some(m_ref);
    report.fit = Some(fit);
    report.theoretical_exponent = Some(theory);
    clock.log(format!("verdict {:?}", report.verdict));
    report.meta = clock.finish();
    Ok(report)
}

/// Mid-step increment moments `E|X_r − X_{π_n(r)}|^p` against `n^{−p/α}`.
pub fn run_moment_check(config: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_kind(config, &[ExperimentKind::MomentCheck])?;
    let mut clock = Clock::start();
    let d = config.dim();
    let sampler = IncrementSampler::new(config.stable_spec()?)?;
    let drift = config.drift.bounded(d)?;
    let p = config.moment_order.unwrap_or(0.5 * config.alpha);
    clock.log(format!("moment check: p = {p}, n = {:?}", config.n_ladder));
    let m = increment_moment_check(&scheme_config(config, 1), &sampler, drift.as_ref(), &config.n_ladder, p)?;
    let verdict = if (m.slope - m.expected_slope).abs() <= MOMENT_SLOPE_TOL {
        Verdict::Consistent
    } else {
        Verdict::Inconsistent
    };
    let mut report = ExperimentReport::new(config, verdict);
    let mut rows: Vec<ErrorRow> = m
        .points
        .iter()
        .map(|pt| ErrorRow {
            n: pt.n,
            m: None,
            error: pt.moment,
            ci: Some(crate::metrics::Z95 * pt.se),
            ci_independent: None,
            estimator: Estimator::Moment,
            slope_partial: None,
            witness: None,
        })
        .collect();
    partial_slopes(&mut rows);
    report.rows = rows;
    report.theoretical_exponent = Some(m.expected_slope);
    report.moments = Some(m);
    clock.log(format!("verdict {:?}", report.verdict));
    report.meta = clock.finish();
    Ok(report)
}

/// Distance between the laws of the scheme with `b` and with `b_m` across the
/// m-ladder, ranked against `‖b − b_m‖_{B^{−θ}}`.
pub fn run_stability_probe(config: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_kind(config, &[ExperimentKind::StabilityProbe])?;
    let mut clock = Clock::start();
    let d = config.dim();
    let t = config.observation_time();
    let n = *config.n_ladder.last().expect("validated");
    let theta = config.theta_or_default().expect("lacunary drift");
    let beta = config.drift.beta().expect("lacunary drift");
    let sampler = IncrementSampler::new(config.stable_spec()?)?;
    let b = config.drift.lacunary(d)?;
    let mollifier = Mollifier::standard(d)?;
    let mollified: Vec<_> = config.m_ladder.iter().map(|&m| b.mollify(mollifier, m)).collect::<Result<_>>()?;
    let norms: Vec<f64> = mollified
        .iter()
        .map(|bm| Ok(b.difference(bm)?.besov_norm(-theta)))
        .collect::<Result<_>>()?;
    let compiled: Vec<CompiledDrift> = mollified.iter().map(CompiledDrift::new).collect();
    let reference_drift = CompiledDrift::new(&b);
    let levels: Vec<CoupledLevel> = compiled.iter().map(|c| CoupledLevel { n, drift: c as &dyn Drift }).collect();
    clock.log(format!("stability probe: N = {}, n = {n}, m = {:?}", config.paths, config.m_ladder));
    let run = simulate_coupled(&scheme_config(config, n), &sampler, &reference_drift, &levels)?;
    clock.log("simulation done");

    let mut report = ExperimentReport::new(config, Verdict::Inconclusive);
    let hash = report.config_hash.clone();
    let reference = EmpiricalLaw::new(run.reference, d, t)?.with_provenance(hash.clone());
    let laws = laws_of(run.levels, d, t, &hash)?;
    let dict = TestDictionary::standard(&reference)?;
    let mut rows = Vec::with_capacity(laws.len());
    for ((m, law), norm) in config.m_ladder.iter().zip(&laws).zip(&norms) {
        let w = weak_error_paired(law, &reference, &dict)?;
        let tv = tv_histogram(law, &reference, histogram_bins(d))?;
        rows.push(StabilityRow {
            m: *m,
            proxy: w.max_gap,
            ci: w.ci,
            tv_histogram: tv.tv,
            norm_difference: *norm,
        });
    }
    let resolved = rows
        .iter()
        .filter(|r| r.proxy > NOISE_FLOOR * r.ci && r.proxy > ROUNDOFF_FLOOR)
        .count();
    let proxies: Vec<f64> = rows.iter().map(|r| r.proxy).collect();
    let rho = spearman(&proxies, &norms).ok();
    report.verdict = match rho {
        Some(r) if resolved >= MIN_FIT_POINTS.min(rows.len()) => {
            if r > STABILITY_SPEARMAN {
                Verdict::Consistent
            } else {
                Verdict::Inconsistent
            }
        }
        _ => Verdict::Inconclusive,
    };
    let log_m: Vec<f64> = config.m_ladder.iter().map(|m| m.ln()).collect();
    let log_norm: Vec<f64> = norms.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
    let norm_fit = linear_fit(&log_m, &log_norm, &vec![1.0; log_m.len()])?;
    report.stability = Some(StabilitySummary {
        n,
        theta,
        rows,
        resolved,
        spearman: rho,
        norm_slope: norm_fit.slope,
        expected_norm_slope: -(theta - beta),
    });
    if config.save_samples {
        keep_samples(&mut report, format!("b-{n}"), &reference);
        for (m, law) in config.m_ladder.iter().zip(&laws) {
            keep_samples(&mut report, format!("m{m}"), law);
        }
    }
    clock.log(format!("verdict {:?}", report.verdict));
    report.meta = clock.finish();
    Ok(report)
}

/// Endpoint populations of the scheme at every `n` of the ladder, each run
/// on its own noise. Lacunary drifts are mollified at `m = n^γ` rounded to a
/// power of two, with `γ = 1/α` when unset. No rate is fitted.
pub fn run_simulation(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let mut clock = Clock::start();
    let d = config.dim();
    let t = config.observation_time();
    let sampler = IncrementSampler::new(config.stable_spec()?)?;
    let mut report = ExperimentReport::new(config, Verdict::Inconclusive);
    let gamma = config.gamma.unwrap_or(1.0 / config.alpha);
    let mut ms = Vec::with_capacity(config.n_ladder.len());
    for &n in &config.n_ladder {
        let run = if config.drift.is_bounded() {
            ms.push(None);
            simulate_population(&scheme_config(config, n), &sampler, config.drift.bounded(d)?.as_ref(), &[])
        } else {
            let m = power_of_two_level((n as f64).powf(gamma));
            ms.push(Some(m));
            simulate_population(&scheme_config(config, n), &sampler, &config.drift.mollified(d, m)?, &[])
        }
        .map_err(|e| match e {
            Error::PathAborted { .. } => Error::Simulation { n, source: Box::new(e) },
            e => e,
        })?;
        clock.log(format!("n = {n} done"));
        report.samples.push(SampleSet {
            label: n.to_string(),
            dim: d,
            time: t,
            data: run.samples.into_iter().next().expect("one observation time"),
        });
    }
    for (n, m) in config.n_ladder.iter().zip(ms) {
        report.notes.push(match m {
            Some(m) => format!("n = {n}: simulated with b_m, m = {m}"),
            None => format!("n = {n}: simulated with the bounded drift"),
        });
    }
    report.meta = clock.finish();
    Ok(report)
}
