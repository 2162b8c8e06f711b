//! Library results against independent closed forms.

use std::f64::consts::PI;

use statrs::function::erf::erf;
use statrs::function::gamma::gamma;

use stable_euler::heat_kernel::{stable_tail_mass_1d, KernelGrid, Symbol};
use stable_euler::metrics::{
    fit_rate, theoretical_exponent, tv_histogram, weak_error, EmpiricalLaw, RatePoint, Regime, TestDictionary,
    Verdict,
};
use stable_euler::rng::RngStream;
use stable_euler::sampling::{ecf_grid, max_ecf_deviation, IncrementSampler};
use stable_euler::stable_model::{radial_constant, AlphaDomain, SpectralMeasure, StableSpec};

/// `∫₀^∞ (1 − cos u) u^{−1−α} du = π / (2 Γ(1+α) sin(πα/2))`.
fn radial_constant_closed_form(alpha: f64) -> f64 {
    PI / (2.0 * gamma(1.0 + alpha) * (PI * alpha / 2.0).sin())
}

#[test]
fn radial_constant_matches_gamma_closed_form() {
    for i in 1..40 {
        let alpha = 1.0 + i as f64 / 40.0;
        let got = radial_constant(alpha, AlphaDomain::Model).unwrap();
        let want = radial_constant_closed_form(alpha);
        assert!((got - want).abs() <= 1e-10 * want, "α = {alpha}: {got} vs {want}");
    }
    for alpha in [0.3, 0.5, 1.0] {
        let got = radial_constant(alpha, AlphaDomain::Validation).unwrap();
        let want = radial_constant_closed_form(alpha);
        assert!((got - want).abs() <= 1e-10 * want, "α = {alpha}: {got} vs {want}");
    }
    assert!(radial_constant(0.5, AlphaDomain::Model).is_err());
}

#[test]
fn one_dimensional_symbol_uses_closed_form_constant() {
    // Σ = ½(δ₁ + δ₋₁) gives ψ(ξ) = C_α |ξ|^α
    let alpha = 1.7;
    let spec = StableSpec::new(alpha, SpectralMeasure::uniform(1, 1.0).unwrap()).unwrap();
    let want = radial_constant_closed_form(alpha) * 2.5f64.powf(alpha);
    assert!((spec.characteristic_exponent(&[2.5]) - want).abs() < 1e-10 * want);
}

#[test]
fn cauchy_density_and_tail() {
    let grid = KernelGrid::for_times(Symbol::cauchy().unwrap(), None, 0.5).unwrap();
    for (t, x) in [(1.0, 0.0), (1.0, 3.0), (0.7, -0.2)] {
        let want = t / (PI * (t * t + x * x));
        assert!((grid.density(0.0, t, &[x]).unwrap() - want).abs() < 1e-9);
    }
    // P(|X| > r) = 1 − (2/π) arctan(r) for the standard Cauchy law, ψ = |ξ|
    let r: f64 = 50.0;
    let want = 1.0 - 2.0 / PI * r.atan();
    let got = stable_tail_mass_1d(1.0, 1.0, r, 40);
    assert!((got - want).abs() < 1e-9, "{got} vs {want}");
}

#[test]
fn sampler_matches_characteristic_function() {
    let n = 200_000;
    let spec = StableSpec::new(1.4, SpectralMeasure::cylindrical(2, 0.8).unwrap()).unwrap();
    let sampler = IncrementSampler::new(spec.clone()).unwrap();
    let dt = 0.3;
    let samples = sampler.sample_population(dt, n, 11).unwrap();
    let dev = max_ecf_deviation(&samples, 2, &ecf_grid(2), |xi| {
        num_complex::Complex64::new((-dt * spec.characteristic_exponent(xi)).exp(), 0.0)
    });
    assert!(dev <= 4.0 / (n as f64).sqrt(), "{dev}");
}

fn gaussian_law(n: usize, shift: f64, seed: u64) -> EmpiricalLaw {
    let mut st = RngStream::new(seed, 0);
    EmpiricalLaw::new((0..n).map(|_| st.standard_normal() + shift).collect(), 1, 1.0).unwrap()
}

/// `TV(N(0,1), N(δ,1)) = erf(δ / (2√2))`.
fn gaussian_shift_tv(delta: f64) -> f64 {
    erf(delta.abs() / (2.0 * 2f64.sqrt()))
}

#[test]
fn histogram_tv_of_shifted_gaussians() {
    let n = 400_000;
    let base = gaussian_law(n, 0.0, 1);
    for (i, delta) in [0.25, 0.5, 1.0, 2.0].into_iter().enumerate() {
        let other = gaussian_law(n, delta, 2 + i as u64);
        let est = tv_histogram(&base, &other, 200).unwrap();
        let want = gaussian_shift_tv(delta);
        assert!((est.tv - want).abs() < 0.02, "δ = {delta}: {} vs {want}", est.tv);
        assert!(est.upper + 1e-12 >= est.tv - (est.clipped_a + est.clipped_b));
    }
}

#[test]
fn dictionary_gap_is_bounded_by_twice_total_variation() {
    // test functions take values in [−1, 1], so each gap is at most 2·TV
    let n = 50_000;
    for i in 0..20 {
        let delta = 0.05 * (i + 1) as f64;
        let a = gaussian_law(n, 0.0, 100 + i);
        let b = gaussian_law(n, delta, 200 + i);
        let dict = TestDictionary::standard(&b).unwrap();
        let w = weak_error(&a, &b, &dict).unwrap();
        let bound = 2.0 * gaussian_shift_tv(delta);
        assert!(w.max_gap <= bound + 0.02, "δ = {delta}: gap {} > {bound}", w.max_gap);
    }
}

#[test]
fn dictionary_detects_a_known_shift() {
    // E sin(kZ) under Z ~ N(δ, 1) is sin(kδ) e^{−k²/2}
    let n = 200_000;
    let a = gaussian_law(n, 0.0, 5);
    let b = gaussian_law(n, 0.5, 6);
    let dict = TestDictionary::new(
        1,
        vec![0.0],
        vec![1.0],
        vec![stable_euler::metrics::TestFunction::Sin { k: vec![1.0] }],
    )
    .unwrap();
    let w = weak_error(&a, &b, &dict).unwrap();
    let want = 0.5f64.sin() * (-0.5f64).exp();
    assert!((w.max_gap - want).abs() < 3.0 * w.ci, "{} vs {want} ± {}", w.max_gap, w.ci);
}

#[test]
fn rate_fit_recovers_power_laws_and_flags_noise() {
    let ns = [8.0, 16.0, 32.0, 64.0, 128.0, 256.0];
    let pts: Vec<RatePoint> = ns.iter().map(|&n| RatePoint { n, error: 0.4 * f64::powf(n, -0.5), ci: 1e-4 }).collect();
    let fit = fit_rate(&pts).unwrap();
    assert!((fit.slope().unwrap() + 0.5).abs() < 1e-12);
    assert_eq!(fit.verdict_upper(-1.0 / 3.0, 0.3), Verdict::Consistent);
    assert_eq!(fit.verdict_upper(-1.0, 0.3), Verdict::Inconsistent);

    // only three points clear 3·CI
    let pts: Vec<RatePoint> = ns
        .iter()
        .map(|&n| RatePoint { n, error: f64::powf(n, -1.0), ci: 0.006 })
        .collect();
    let fit = fit_rate(&pts).unwrap();
    assert_eq!(fit.used(), 3);
    assert_eq!(fit.verdict_upper(-1.0 / 3.0, 0.3), Verdict::Inconclusive);
}

#[test]
fn exponents_of_the_three_regimes() {
    let bounded = theoretical_exponent(1.5, 0.0, 0.0, 0.0, 0.0, Regime::Bounded).unwrap();
    assert!((bounded + 1.0 / 3.0).abs() < 1e-15);
    // δ = α − 1 − β < (α − 1) once β > 0
    let e = theoretical_exponent(1.5, 0.2, 0.0, 0.0, 0.0, Regime::Bounded).unwrap();
    assert!((e + 0.3 / 1.5).abs() < 1e-15);

    // γ = 1/α, θ → α − 1 − β: −(α − 1 − 2β)/α
    let (alpha, beta) = (1.6, 0.1);
    let e = theoretical_exponent(alpha, beta, 1.0 / alpha, alpha - 1.0 - beta - 1e-9, 0.0, Regime::DistI).unwrap();
    assert!((e + (alpha - 1.0 - 2.0 * beta) / alpha).abs() < 1e-8);

    // second regime at its closed left endpoint
    let e = theoretical_exponent(1.6, 0.3, 0.5, 0.0, 0.05, Regime::DistIi).unwrap();
    let first: f64 = -0.6 / 1.6 + 0.3 * (0.5 + 1.0 / 1.6);
    let second = -0.5 * 0.3 + 0.05;
    assert!((e - first.max(second)).abs() < 1e-12);
}
