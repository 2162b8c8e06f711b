use rayon::prelude::*;
use serde::Serialize;

use super::{Drift, EulerConfig};
use crate::error::{ensure, Result};
use crate::metrics::linear_fit;
use crate::reduce::Neumaier;
use crate::rng::RngStream;
use crate::sampling::IncrementSampler;

#[derive(Debug, Clone, Serialize)]
pub struct MomentPoint {
    pub n: u64,
    /// Estimate of `E|X_r − X_{π_n(r)}|^p` at mid-step `r`, averaged over steps.
    pub moment: f64,
    /// Standard error across paths.
    pub se: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub p: f64,
    pub alpha: f64,
    pub points: Vec<MomentPoint>,
    pub slope: f64,
    pub slope_se: f64,
    /// `−p/α`, the slope when the noise term dominates.
    pub expected_slope: f64,
}

/// Mid-step moments `E|X_r − X_{π_n(r)}|^p` over an n-ladder.
///
/// Every step is split into two half-step increments; the state after the
/// first half is the mid-step state. Per-path averages over all steps are
/// independent across paths and give the standard error.
pub fn increment_moment_check(
    base: &EulerConfig,
    sampler: &IncrementSampler,
    drift: &dyn Drift,
    n_ladder: &[u64],
    p: f64,
) -> Result<MomentReport> {
    let alpha = sampler.spec().alpha();
    ensure(p > 0.0 && p < alpha, "p", || format!("0 < p < α = {alpha}, got {p}"))?;
    ensure(!n_ladder.is_empty(), "n_ladder", || "at least one n".into())?;
    let d = sampler.dim();
    let mut points = Vec::with_capacity(n_ladder.len());
    for &n in n_ladder {
        let config = EulerConfig { n, ..base.clone() };
        config.validate()?;
        let (full, rest) = config.steps();
        let h = 1.0 / n as f64;
        let total = full + u64::from(rest > 0.0);
        let half_scaled = (0.5 * h).powf(1.0 / alpha);
        let per_path: Vec<f64> = (0..config.paths)
            .into_par_iter()
            .map(|i| {
                let mut st = RngStream::new(config.master_seed, i as u64);
                let mut x = config.x0.clone();
                let mut v = vec![0.0; d];
                let mut half = vec![0.0; d];
                let mut acc = Neumaier::default();
                for k in 0..total {
                    let len = if k < full { h } else { rest };
                    drift.eval(&x, &mut v);
                    half.iter_mut().for_each(|z| *z = 0.0);
                    let hs = if k < full { half_scaled } else { (0.5 * len).powf(1.0 / alpha) };
                    sampler.add_scaled_increment(hs, &mut st, &mut half);
                    let r: f64 = (0..d).map(|j| (v[j] * 0.5 * len + half[j]).powi(2)).sum::<f64>().sqrt();
                    acc.add(r.powf(p));
                    sampler.add_scaled_increment(hs, &mut st, &mut half);
                    for j in 0..d {
                        x[j] += v[j] * len + half[j];
                    }
                }
                acc.value() / total as f64
            })
            .collect();
        let nf = per_path.len() as f64;
        let mut s = Neumaier::default();
        per_path.iter().for_each(|v| s.add(*v));
        let mean = s.value() / nf;
        let mut q = Neumaier::default();
        per_path.iter().for_each(|v| q.add((v - mean).powi(2)));
        let se = (q.value() / (nf - 1.0).max(1.0) / nf).sqrt();
        points.push(MomentPoint { n, moment: mean, se });
    }
    let xs: Vec<f64> = points.iter().map(|pt| (pt.n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|pt| pt.moment.ln()).collect();
    let ws = vec![1.0; xs.len()];
    let fit = linear_fit(&xs, &ys, &ws)?;
    Ok(MomentReport {
        p,
        alpha,
        points,
        slope: fit.slope,
        slope_se: fit.slope_se,
        expected_slope: -p / alpha,
    })
}
