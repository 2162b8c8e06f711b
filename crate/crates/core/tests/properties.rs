//! Invariants checked on random inputs.

use proptest::prelude::*;

use stable_euler::besov::DyadicPartition;
use stable_euler::metrics::{
    fit_rate, spearman, theoretical_exponent, tv_histogram, weak_error, EmpiricalLaw, RatePoint, Regime,
    TestDictionary,
};
use stable_euler::rng::RngStream;
use stable_euler::stable_model::{SpectralMeasure, StableSpec};

fn law(values: Vec<f64>) -> EmpiricalLaw {
    EmpiricalLaw::new(values, 1, 1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rate_fit_is_scale_equivariant(
        slope in -1.5f64..-0.1,
        c in 0.01f64..100.0,
        shift in 1u32..4,
        wiggle in prop::collection::vec(-0.05f64..0.05, 6),
    ) {
        let pts: Vec<RatePoint> = (0..6)
            .map(|k| {
                let n = f64::from(8u32 << k);
                RatePoint { n, error: f64::powf(n, slope) * (1.0 + wiggle[k]), ci: 1e-6 * f64::powf(n, slope) }
            })
            .collect();
        let base = fit_rate(&pts).unwrap().slope().unwrap();
        let scaled: Vec<RatePoint> = pts
            .iter()
            .map(|p| RatePoint { n: p.n * f64::from(1u32 << shift), error: c * p.error, ci: c * p.ci })
            .collect();
        let other = fit_rate(&scaled).unwrap().slope().unwrap();
        prop_assert!((base - other).abs() < 1e-9, "{} vs {}", base, other);
    }

    #[test]
    fn tv_is_symmetric_and_in_range(
        a in prop::collection::vec(-50.0f64..50.0, 10..300),
        b in prop::collection::vec(-50.0f64..50.0, 10..300),
        bins in 1usize..60,
    ) {
        let (la, lb) = (law(a), law(b));
        let ab = tv_histogram(&la, &lb, bins).unwrap();
        let ba = tv_histogram(&lb, &la, bins).unwrap();
        prop_assert!((ab.tv - ba.tv).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab.tv));
        prop_assert!((0.0..=1.0).contains(&ab.upper));
        prop_assert_eq!(tv_histogram(&la, &la, bins).unwrap().tv, 0.0);
    }

    #[test]
    fn weak_error_is_symmetric_and_bounded(
        a in prop::collection::vec(-10.0f64..10.0, 20..200),
        b in prop::collection::vec(-10.0f64..10.0, 20..200),
    ) {
        let (la, lb) = (law(a), law(b));
        let dict = TestDictionary::standard(&lb).unwrap();
        let ab = weak_error(&la, &lb, &dict).unwrap();
        let ba = weak_error(&lb, &la, &dict).unwrap();
        prop_assert!((ab.max_gap - ba.max_gap).abs() < 1e-12);
        prop_assert!(ab.max_gap <= 2.0);
    }

    #[test]
    fn spearman_is_rank_invariant(v in prop::collection::vec(-5.0f64..5.0, 3..40)) {
        let w: Vec<f64> = v.iter().map(|x| x.exp() * 3.0 + 1.0).collect();
        prop_assume!(v.iter().any(|x| *x != v[0]));
        let r = spearman(&v, &w).unwrap();
        prop_assert!((r - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        prop_assert!((spearman(&v, &neg).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn exponent_is_continuous_in_gamma(
        alpha in 1.2f64..1.9,
        beta_frac in 0.1f64..0.9,
        gamma_frac in 0.1f64..0.9,
        h in 1e-9f64..1e-6,
    ) {
        let a1 = alpha - 1.0;
        let beta = beta_frac * a1 / 2.0;
        let gamma = gamma_frac * a1 / (2.0 * alpha * beta);
        let theta = 0.5 * (beta + a1 - beta);
        let e0 = theoretical_exponent(alpha, beta, gamma, theta, 0.0, Regime::DistI).unwrap();
        let e1 = theoretical_exponent(alpha, beta, gamma + h, theta, 0.0, Regime::DistI).unwrap();
        // each branch is Lipschitz in γ with constant at most 2β + θ
        prop_assert!((e1 - e0).abs() <= (2.0 * beta + theta) * h * (1.0 + 1e-9));
        prop_assert!(e0 < 0.0);
    }

    #[test]
    fn bounded_exponent_never_beats_euler_order(alpha in 1.01f64..1.99, beta_frac in 0.0f64..0.99) {
        let beta = beta_frac * (alpha - 1.0);
        let e = theoretical_exponent(alpha, beta, 0.0, 0.0, 0.0, Regime::Bounded).unwrap();
        prop_assert!(e >= -(alpha - 1.0) / alpha - 1e-15 && e < 0.0);
    }

    #[test]
    fn partition_sums_to_one(r in 0.0f64..4096.0, j_max in 4i32..14) {
        let p = DyadicPartition::new(j_max);
        prop_assume!(r <= f64::from(j_max).exp2());
        prop_assert!(p.unity_residual(r) < 1e-12);
    }

    #[test]
    fn streams_are_reproducible(seed in any::<u64>(), id in any::<u64>(), skip in 0usize..50) {
        let mut a = RngStream::new(seed, id);
        for _ in 0..skip {
            a.next_u64();
        }
        let mut b = RngStream::at(seed, id, a.counter());
        prop_assert_eq!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn symbol_is_alpha_homogeneous(alpha in 1.05f64..1.95, lambda in 0.1f64..10.0, x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let spec = StableSpec::new(alpha, SpectralMeasure::cylindrical(2, 1.0).unwrap()).unwrap();
        let a = spec.characteristic_exponent(&[lambda * x, lambda * y]);
        let b = lambda.powf(alpha) * spec.characteristic_exponent(&[x, y]);
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        prop_assert!(spec.characteristic_exponent(&[-x, -y]) == spec.characteristic_exponent(&[x, y]));
    }
}
