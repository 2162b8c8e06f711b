use rayon::prelude::*;
use serde::Serialize;

use super::{Drift, EulerConfig};
use crate::error::{ensure, Error, Result};
use crate::rng::RngStream;
use crate::sampling::IncrementSampler;

const TIME_EPS: f64 = 1e-12;

/// Endpoint populations of the scheme at the observation times.
#[derive(Debug, Clone, Serialize)]
pub struct EulerRun {
    pub config: EulerConfig,
    pub drift: serde_json::Value,
    pub dim: usize,
    pub times: Vec<f64>,
    /// One row-major `N × d` array per observation time.
    pub samples: Vec<Vec<f64>>,
}

fn check_inputs(config: &EulerConfig, sampler: &IncrementSampler, drift: &dyn Drift) -> Result<usize> {
    config.validate()?;
    let d = sampler.dim();
    ensure(drift.dim() == d, "drift", || format!("drift dimension {} ≠ noise dimension {d}", drift.dim()))?;
    ensure(config.x0.len() == d, "x0", || format!("x0 must have {d} coordinates"))?;
    Ok(d)
}

fn check_times(times: &[f64], horizon: f64) -> Result<()> {
    ensure(times.windows(2).all(|w| w[0] <= w[1]), "checkpoints", || "checkpoints must be sorted".into())?;
    ensure(times.iter().all(|t| (0.0..=horizon).contains(t)), "checkpoints", || {
        format!("checkpoints must lie in [0, {horizon}]")
    })
}

/// One path of the scheme; returns the states at the checkpoints.
///
/// Each grid step draws its increment as independent pieces split at the
/// checkpoints falling inside it, so interior checkpoint states have the
/// correct joint law with the grid states.
pub fn integrate_path(
    config: &EulerConfig,
    sampler: &IncrementSampler,
    drift: &dyn Drift,
    stream: &mut RngStream,
    checkpoints: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let d = check_inputs(config, sampler, drift)?;
    check_times(checkpoints, config.horizon)?;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut x = config.x0.clone();
    let mut v = vec![0.0; d];
    let mut noise = vec![0.0; d];
    let mut ci = 0;
    while ci < checkpoints.len() && checkpoints[ci] <= TIME_EPS {
        out.push(x.clone());
        ci += 1;
    }
    let (full, rest) = config.steps();
    let h = 1.0 / config.n as f64;
    let total = full + u64::from(rest > 0.0);
    for k in 0..total {
        let a = k as f64 * h;
        let e = if k < full { (k + 1) as f64 * h } else { config.horizon };
        drift.eval(&x, &mut v);
        noise.iter_mut().for_each(|z| *z = 0.0);
        let mut pos = a;
        while ci < checkpoints.len() && checkpoints[ci] < e - TIME_EPS {
            let c = checkpoints[ci];
            if c > pos + TIME_EPS {
                sampler.add_increment(c - pos, stream, &mut noise);
                pos = c;
            }
            out.push((0..d).map(|i| x[i] + v[i] * (c - a) + noise[i]).collect());
            ci += 1;
        }
        sampler.add_increment(e - pos, stream, &mut noise);
        for i in 0..d {
            x[i] += v[i] * (e - a) + noise[i];
        }
        if x.iter().any(|z| !z.is_finite()) {
            return Err(Error::PathAborted {
                path: stream.stream_id() as usize,
                time: e,
            });
        }
        while ci < checkpoints.len() && checkpoints[ci] <= e + TIME_EPS {
            out.push(x.clone());
            ci += 1;
        }
    }
    Ok(out)
}

/// `N` independent paths, path `i` on stream `(master_seed, i)`.
pub fn simulate_population(
    config: &EulerConfig,
    sampler: &IncrementSampler,
    drift: &dyn Drift,
    t_obs: &[f64],
) -> Result<EulerRun> {
    let d = check_inputs(config, sampler, drift)?;
    let times: Vec<f64> = if t_obs.is_empty() { vec![config.horizon] } else { t_obs.to_vec() };
    check_times(&times, config.horizon)?;
    let paths: Vec<Result<Vec<Vec<f64>>>> = (0..config.paths)
        .into_par_iter()
        .map(|i| {
            let mut st = RngStream::new(config.master_seed, i as u64);
            integrate_path(config, sampler, drift, &mut st, &times)
        })
        .collect();
    let mut samples = vec![Vec::with_capacity(config.paths * d); times.len()];
    for p in paths {
        for (dst, state) in samples.iter_mut().zip(p?) {
            dst.extend_from_slice(&state);
        }
    }
    Ok(EulerRun {
        config: config.clone(),
        drift: drift.describe(),
        dim: d,
        times,
        samples,
    })
}

/// A coarse level of a coupled simulation.
pub struct CoupledLevel<'a> {
    pub n: u64,
    pub drift: &'a dyn Drift,
}

/// Endpoints at `T` of every level and of the reference, path `i` of every
/// level driven by the same noise.
#[derive(Debug, Clone, Serialize)]
pub struct CoupledRun {
    pub dim: usize,
    pub paths: usize,
    pub n_ref: u64,
    pub levels: Vec<(u64, Vec<f64>)>,
    pub reference: Vec<f64>,
}

struct LevelState {
    every: u64,
    left: u64,
    x: Vec<f64>,
    v: Vec<f64>,
    /// Noise accumulated since the level's last node.
    acc: Vec<f64>,
    start: f64,
}

fn aborted(n: u64, path: usize, time: f64) -> Error {
    Error::Simulation {
        n,
        source: Box::new(Error::PathAborted { path, time }),
    }
}

/// Simulates the levels and the reference on common random numbers.
///
/// The noise is drawn once on the reference grid (`config.n` is `n_ref`);
/// each coarse level with `n | n_ref` sums the fine increments over its own
/// steps, so every level sees an exact increment of the same Lévy path.
pub fn simulate_coupled(
    config: &EulerConfig,
    sampler: &IncrementSampler,
    reference: &dyn Drift,
    levels: &[CoupledLevel<'_>],
) -> Result<CoupledRun> {
    let d = check_inputs(config, sampler, reference)?;
    let n_ref = config.n;
    for l in levels {
        ensure(l.n >= 1 && n_ref % l.n == 0, "n", || format!("level n = {} must divide n_ref = {n_ref}", l.n))?;
        ensure(l.drift.dim() == d, "drift", || "drift dimension mismatch".into())?;
    }
    let (full, rest) = config.steps();
    let h = 1.0 / n_ref as f64;
    let total = full + u64::from(rest > 0.0);
    let h_scaled = h.powf(1.0 / sampler.spec().alpha());

    let results: Vec<Result<(Vec<f64>, Vec<Vec<f64>>)>> = (0..config.paths)
        .into_par_iter()
        .map(|i| {
            let mut st = RngStream::new(config.master_seed, i as u64);
            let mut x = config.x0.clone();
            let mut v = vec![0.0; d];
            let mut inc = vec![0.0; d];
            let mut states: Vec<LevelState> = levels
                .iter()
                .map(|l| {
                    let mut s = LevelState {
                        every: n_ref / l.n,
                        left: n_ref / l.n,
                        x: config.x0.clone(),
                        v: vec![0.0; d],
                        acc: vec![0.0; d],
                        start: 0.0,
                    };
                    l.drift.eval(&s.x, &mut s.v);
                    s
                })
                .collect();
            for k in 0..total {
                let a = k as f64 * h;
                let e = if k < full { (k + 1) as f64 * h } else { config.horizon };
                inc.iter_mut().for_each(|z| *z = 0.0);
                if k < full {
                    sampler.add_scaled_increment(h_scaled, &mut st, &mut inc);
                } else {
                    sampler.add_increment(e - a, &mut st, &mut inc);
                }
                reference.eval(&x, &mut v);
                for j in 0..d {
                    x[j] += v[j] * (e - a) + inc[j];
                }
                if !x.iter().all(|z| z.is_finite()) {
                    return Err(aborted(n_ref, i, e));
                }
                let last = k + 1 == total;
                for (s, l) in states.iter_mut().zip(levels) {
                    for j in 0..d {
                        s.acc[j] += inc[j];
                    }
                    s.left -= 1;
                    if s.left == 0 || last {
                        s.left = s.every;
                        let len = e - s.start;
                        for j in 0..d {
                            s.x[j] += s.v[j] * len + s.acc[j];
                            s.acc[j] = 0.0;
                        }
                        if !s.x.iter().all(|z| z.is_finite()) {
                            return Err(aborted(l.n, i, e));
                        }
                        s.start = e;
                        l.drift.eval(&s.x, &mut s.v);
                    }
                }
            }
            Ok((x, states.into_iter().map(|s| s.x).collect()))
        })
        .collect();

    let mut reference_out = Vec::with_capacity(config.paths * d);
    let mut level_out: Vec<Vec<f64>> = vec![Vec::with_capacity(config.paths * d); levels.len()];
    for r in results {
        let (x, xs) = r?;
        reference_out.extend_from_slice(&x);
        for (dst, s) in level_out.iter_mut().zip(xs) {
            dst.extend_from_slice(&s);
        }
    }
    Ok(CoupledRun {
        dim: d,
        paths: config.paths,
        n_ref,
        levels: levels.iter().map(|l| l.n).zip(level_out).collect(),
        reference: reference_out,
    })
}
