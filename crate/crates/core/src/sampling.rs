//! Exact-in-law sampling of stable increments.
//!
//! The one-dimensional symmetric law with characteristic function
//! `exp(−|ξ|^α)` is drawn by the Chambers–Mallows–Stuck formula. Isotropic
//! noise is a Gaussian subordinated by a positive (α/2)-stable variable;
//! atomic noise is a sum of independent one-dimensional draws, one per
//! symmetric pair `±θ`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{ensure, Error, Result};
use crate::reduce::par_sum_vec;
use crate::rng::RngStream;
use crate::stable_model::{matrix_apply, StableSpec, TimeScaling};

/// Symmetric α-stable draw with characteristic function `exp(−|ξ|^α)`.
pub fn sample_standard_1d(alpha: f64, stream: &mut RngStream) -> Result<f64> {
    ensure(alpha > 0.0 && alpha < 2.0, "alpha", || format!("0 < α < 2, got {alpha}"))?;
    ensure(alpha != 1.0, "alpha", || "α ≠ 1 (the formula degenerates)".into())?;
    Ok(cms(alpha, stream))
}

#[inline]
fn cms(alpha: f64, stream: &mut RngStream) -> f64 {
    let u = PI * (stream.uniform_open() - 0.5);
    let e = stream.exponential();
    let log_mag = ((1.0 - alpha) * (((1.0 - alpha) * u).cos() / e).ln() - u.cos().ln()) / alpha;
    (alpha * u).sin() * log_mag.exp()
}

/// Positive `a`-stable draw with Laplace transform `E e^{−λS} = exp(−λ^a)`, `a ∈ (0, 1)`.
#[inline]
pub fn sample_positive_stable(a: f64, stream: &mut RngStream) -> f64 {
    let u = PI * stream.uniform_open();
    let e = stream.exponential();
    (a * u).sin() / u.sin().powf(1.0 / a) * (((1.0 - a) * u).sin() / e).powf((1.0 - a) / a)
}

/// How the increment is assembled from scalar draws.
#[derive(Debug, Clone, PartialEq)]
pub enum Decomposition {
    /// `ΔL = (Δt)^{1/α} · scale · √(2S) · Z` with `ψ(ξ) = scale^α |ξ|^α`.
    Isotropic { scale: f64 },
    /// `ΔL = Σ_k (Δt)^{1/α} · scale_k · X_k θ_k`, `scale_k = (2 w_k C_α)^{1/α}`.
    AtomSum { terms: Vec<(Vec<f64>, f64)> },
}

/// Sampler of increments whose law has characteristic function `exp(−Δt ψ(ξ))`.
#[derive(Debug, Clone)]
pub struct IncrementSampler {
    spec: StableSpec,
    decomposition: Decomposition,
}

impl IncrementSampler {
    /// Sampler for a non-degenerate spec.
    pub fn new(spec: StableSpec) -> Result<Self> {
        let nd = spec.nondegeneracy()?;
        if let crate::stable_model::Nondegeneracy::Degenerate { witness } = nd {
            let value = spec.measure().projection_mass(&witness);
            return Err(Error::Degenerate { witness, value });
        }
        Ok(Self::law_only(spec))
    }

    /// Sampler without the non-degeneracy requirement.
    ///
    /// The increment law is still exact; only the scheme's smoothing
    /// properties need non-degeneracy, so law-level tests use this.
    pub fn law_only(spec: StableSpec) -> Self {
        let alpha = spec.alpha();
        let decomposition = match spec.isotropic_coefficient() {
            Some(k) => Decomposition::Isotropic {
                scale: k.powf(1.0 / alpha),
            },
            None => Decomposition::AtomSum {
                terms: spec
                    .measure()
                    .pair_representatives()
                    .into_iter()
                    .map(|(dir, w)| (dir, (2.0 * w * spec.c_alpha()).powf(1.0 / alpha)))
                    .collect(),
            },
        };
        IncrementSampler { spec, decomposition }
    }

    pub fn spec(&self) -> &StableSpec {
        &self.spec
    }

    pub fn decomposition(&self) -> &Decomposition {
        &self.decomposition
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn sample_increment(&self, dt: f64, stream: &mut RngStream) -> Result<Vec<f64>> {
        ensure(dt > 0.0 && dt.is_finite(), "dt", || format!("dt > 0, got {dt}"))?;
        let mut out = vec![0.0; self.dim()];
        self.add_increment(dt, stream, &mut out);
        Ok(out)
    }

    /// Adds one increment over `dt` to `out` (no validation; `dt > 0`).
    #[inline]
    pub fn add_increment(&self, dt: f64, stream: &mut RngStream, out: &mut [f64]) {
        self.add_scaled_increment(dt.powf(1.0 / self.spec.alpha()), stream, out);
    }

    /// As [`add_increment`](Self::add_increment) with `h = dt^{1/α}` precomputed.
    #[inline]
    pub fn add_scaled_increment(&self, h: f64, stream: &mut RngStream, out: &mut [f64]) {
        let alpha = self.spec.alpha();
        match &self.decomposition {
            Decomposition::Isotropic { scale } if out.len() == 1 => {
                out[0] += h * scale * cms(alpha, stream);
            }
            Decomposition::Isotropic { scale } => {
                let s = sample_positive_stable(0.5 * alpha, stream);
                let r = h * scale * (2.0 * s).sqrt();
                for o in out.iter_mut() {
                    *o += r * stream.standard_normal();
                }
            }
            Decomposition::AtomSum { terms } => {
                for (dir, scale) in terms {
                    let x = h * scale * cms(alpha, stream);
                    for (o, t) in out.iter_mut().zip(dir) {
                        *o += x * t;
                    }
                }
            }
        }
    }

    /// `∫_s^t σ_r dL_r` for piecewise-constant `σ`.
    pub fn sample_scaled_increment(
        &self,
        scaling: &TimeScaling,
        s: f64,
        t: f64,
        stream: &mut RngStream,
    ) -> Result<Vec<f64>> {
        ensure(scaling.dim() == self.dim(), "scaling", || "dimension mismatch".into())?;
        let d = self.dim();
        let mut out = vec![0.0; d];
        let mut dl = vec![0.0; d];
        let mut mapped = vec![0.0; d];
        for (len, m) in scaling.overlaps(s, t)? {
            dl.iter_mut().for_each(|x| *x = 0.0);
            self.add_increment(len, stream, &mut dl);
            matrix_apply(m, &dl, &mut mapped);
            for (o, v) in out.iter_mut().zip(&mapped) {
                *o += v;
            }
        }
        Ok(out)
    }

    /// `n` increments over `dt`, sample `i` drawn from stream `(master_seed, i)`.
    /// Row-major `n × d`.
    pub fn sample_population(&self, dt: f64, n: usize, master_seed: u64) -> Result<Vec<f64>> {
        ensure(dt > 0.0 && dt.is_finite(), "dt", || format!("dt > 0, got {dt}"))?;
        let d = self.dim();
        let mut out = vec![0.0; n * d];
        out.par_chunks_mut(d).enumerate().for_each(|(i, row)| {
            let mut st = RngStream::new(master_seed, i as u64);
            self.add_increment(dt, &mut st, row);
        });
        Ok(out)
    }
}

/// Empirical characteristic function of row-major `n × d` samples at `xi`.
pub fn empirical_cf(samples: &[f64], d: usize, xi: &[f64]) -> Complex64 {
    let n = samples.len() / d;
    let s = par_sum_vec(n, 2, |i, out| {
        let x = &samples[i * d..(i + 1) * d];
        let phase: f64 = x.iter().zip(xi).map(|(a, b)| a * b).sum();
        let (sn, cs) = phase.sin_cos();
        out[0] = cs;
        out[1] = sn;
    });
    Complex64::new(s[0] / n as f64, s[1] / n as f64)
}

/// Sixteen frequencies for characteristic-function checks: a radial ladder
/// in d = 1, four radii times four directions in d = 2.
pub fn ecf_grid(d: usize) -> Vec<Vec<f64>> {
    match d {
        1 => (1..=16).map(|k| vec![0.15 * k as f64]).collect(),
        _ => {
            let mut g = Vec::with_capacity(16);
            for r in [0.25, 0.5, 1.0, 2.0] {
                for q in 0..4 {
                    let phi = q as f64 * FRAC_PI_2 / 2.0;
                    let mut v = vec![0.0; d];
                    v[0] = r * phi.cos();
                    v[1] = r * phi.sin();
                    g.push(v);
                }
            }
            g
        }
    }
}

/// `max_ξ |ECF_N(ξ) − target(ξ)|` over the given frequencies.
pub fn max_ecf_deviation<F: Fn(&[f64]) -> Complex64>(samples: &[f64], d: usize, grid: &[Vec<f64>], target: F) -> f64 {
    grid.iter()
        .map(|xi| (empirical_cf(samples, d, xi) - target(xi)).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stable_model::SpectralMeasure;

    #[test]
    fn rejects_alpha_one_and_bad_dt() {
        let mut s = RngStream::new(1, 0);
        assert!(sample_standard_1d(1.0, &mut s).is_err());
        assert!(sample_standard_1d(2.0, &mut s).is_err());
        let spec = StableSpec::new(1.5, SpectralMeasure::uniform(1, 1.0).unwrap()).unwrap();
        let sm = IncrementSampler::new(spec).unwrap();
        assert!(sm.sample_increment(0.0, &mut s).is_err());
        assert!(sm.sample_increment(-1.0, &mut s).is_err());
    }

    #[test]
    fn degenerate_rejected_by_new() {
        let m = SpectralMeasure::symmetric_pairs(&[(vec![1.0, 0.0], 1.0)]).unwrap();
        let spec = StableSpec::new(1.5, m).unwrap();
        assert!(matches!(IncrementSampler::new(spec), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn single_pair_stays_on_its_line() {
        let m = SpectralMeasure::symmetric_pairs(&[(vec![1.0, 0.0], 0.7)]).unwrap();
        let sm = IncrementSampler::law_only(StableSpec::new(1.5, m).unwrap());
        let mut s = RngStream::new(9, 0);
        for _ in 0..1000 {
            let v = sm.sample_increment(0.3, &mut s).unwrap();
            assert_eq!(v[1], 0.0);
        }
    }

    #[test]
    fn positive_stable_laplace_transform() {
        let a = 0.75;
        let n = 200_000;
        let mut s = RngStream::new(4, 0);
        let draws: Vec<f64> = (0..n).map(|_| sample_positive_stable(a, &mut s)).collect();
        for lambda in [0.1, 0.5, 1.0, 3.0] {
            let emp = draws.iter().map(|x| (-lambda * x).exp()).sum::<f64>() / n as f64;
            let want = (-f64::powf(lambda, a)).exp();
            assert!((emp - want).abs() < 4.0 / (n as f64).sqrt(), "{lambda}: {emp} vs {want}");
        }
    }

    #[test]
    fn identity_scaling_matches_plain_increment() {
        let spec = StableSpec::new(1.4, SpectralMeasure::cylindrical(2, 1.0).unwrap()).unwrap();
        let sm = IncrementSampler::new(spec).unwrap();
        let ts = TimeScaling::identity(2, 1.0);
        let mut a = RngStream::new(5, 2);
        let mut b = RngStream::new(5, 2);
        let x = sm.sample_scaled_increment(&ts, 0.2, 0.7, &mut a).unwrap();
        let y = sm.sample_increment(0.5, &mut b).unwrap();
        assert_eq!(x, y);
        assert!(sm.sample_scaled_increment(&ts, 0.7, 0.7, &mut a).is_err());
    }
}
