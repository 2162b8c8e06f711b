//! Euler–Maruyama scheme `X_{t} = X_{π_n(t)} + b(X_{π_n(t)})(t − π_n(t)) + ΔL`
//! with exact stable increments, for bounded drifts and for the closed-form
//! mollified drifts `b_m`.

mod io;
mod moments;
mod scheme;

use serde::{Deserialize, Serialize};

use crate::besov::DriftSpec;
use crate::error::{ensure, Result};

pub use io::{content_hash, read_binary, write_binary, write_csv, RunMetadata, BINARY_MAGIC};
pub use moments::{increment_moment_check, MomentPoint, MomentReport};
pub use scheme::{integrate_path, simulate_coupled, simulate_population, CoupledLevel, CoupledRun, EulerRun};

/// Evaluable drift `b: R^d → R^d`.
pub trait Drift: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64], out: &mut [f64]);
    /// An upper bound on `sup |b|`.
    fn sup_bound(&self) -> f64;
    /// JSON description used for run metadata and content hashes.
    fn describe(&self) -> serde_json::Value;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroDrift {
    pub dim: usize,
}

impl Drift for ZeroDrift {
    fn dim(&self) -> usize {
        self.dim
    }
    #[inline]
    fn eval(&self, _x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
    }
    fn sup_bound(&self) -> f64 {
        0.0
    }
    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "type": "zero", "dim": self.dim })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantDrift {
    pub value: Vec<f64>,
}

impl Drift for ConstantDrift {
    fn dim(&self) -> usize {
        self.value.len()
    }
    #[inline]
    fn eval(&self, _x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.value);
    }
    fn sup_bound(&self) -> f64 {
        self.value.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "type": "constant", "value": self.value })
    }
}

/// `b_i(x) = A sin(x_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SineDrift {
    pub dim: usize,
    pub amplitude: f64,
}

impl Drift for SineDrift {
    fn dim(&self) -> usize {
        self.dim
    }
    #[inline]
    fn eval(&self, x: &[f64], out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(x) {
            *o = self.amplitude * v.sin();
        }
    }
    fn sup_bound(&self) -> f64 {
        self.amplitude.abs() * (self.dim as f64).sqrt()
    }
    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "type": "sine", "dim": self.dim, "amplitude": self.amplitude })
    }
}

impl Drift for DriftSpec {
    fn dim(&self) -> usize {
        self.dim
    }
    #[inline]
    fn eval(&self, x: &[f64], out: &mut [f64]) {
        self.evaluate_into(x, out);
    }
    fn sup_bound(&self) -> f64 {
        DriftSpec::sup_bound(self)
    }
    fn describe(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("drift spec serializes")
    }
}

/// Evaluation form of a [`DriftSpec`] for the scheme's inner loop.
///
/// Phase rotations are precomputed; in one dimension, consecutive terms whose
/// frequency doubles reuse the previous `e^{ikx}` squared instead of a new
/// `sin`/`cos` pair (relative error grows by at most 2 per level).
#[derive(Debug, Clone)]
pub struct CompiledDrift {
    spec: DriftSpec,
    terms: Vec<CompiledTerm>,
}

#[derive(Debug, Clone)]
struct CompiledTerm {
    freq: Vec<f64>,
    cos_phase: f64,
    sin_phase: f64,
    coeff: Vec<f64>,
    squares_previous: bool,
}

impl CompiledDrift {
    pub fn new(spec: &DriftSpec) -> Self {
        let mut terms: Vec<CompiledTerm> = Vec::with_capacity(spec.terms.len());
        for t in &spec.terms {
            let squares_previous = spec.dim == 1
                && terms
                    .last()
                    .is_some_and(|p| t.freq[0] == 2.0 * p.freq[0]);
            let (sin_phase, cos_phase) = t.phase.sin_cos();
            terms.push(CompiledTerm {
                freq: t.freq.clone(),
                cos_phase,
                sin_phase,
                coeff: t.direction.iter().map(|v| v * t.amplitude).collect(),
                squares_previous,
            });
        }
        CompiledDrift {
            spec: spec.clone(),
            terms,
        }
    }

    pub fn spec(&self) -> &DriftSpec {
        &self.spec
    }
}

impl Drift for CompiledDrift {
    fn dim(&self) -> usize {
        self.spec.dim
    }

    #[inline]
    fn eval(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let (mut c, mut s) = (1.0, 0.0);
        for t in &self.terms {
            if t.squares_previous {
                (c, s) = (c * c - s * s, 2.0 * c * s);
            } else {
                let arg: f64 = t.freq.iter().zip(x).map(|(k, x)| k * x).sum();
                (s, c) = arg.sin_cos();
            }
            let value = c * t.cos_phase - s * t.sin_phase;
            for (o, v) in out.iter_mut().zip(&t.coeff) {
                *o += value * v;
            }
        }
    }

    fn sup_bound(&self) -> f64 {
        self.spec.sup_bound()
    }

    fn describe(&self) -> serde_json::Value {
        Drift::describe(&self.spec)
    }
}

/// Run parameters shared by all scheme entry points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EulerConfig {
    /// Steps per unit time.
    pub n: u64,
    /// Horizon `T`.
    pub horizon: f64,
    pub x0: Vec<f64>,
    pub paths: usize,
    pub master_seed: u64,
}

impl EulerConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(self.n >= 1, "n", || "n ≥ 1".into())?;
        ensure(self.paths >= 1, "paths", || "N ≥ 1".into())?;
        ensure(self.horizon > 0.0 && self.horizon.is_finite(), "horizon", || {
            format!("T > 0, got {}", self.horizon)
        })?;
        ensure(self.x0.iter().all(|v| v.is_finite()), "x0", || "finite initial point".into())
    }

    /// Number of full steps `⌊nT⌋` and the length of the trailing partial step.
    pub fn steps(&self) -> (u64, f64) {
        let h = 1.0 / self.n as f64;
        let nt = self.n as f64 * self.horizon;
        let mut k = nt.floor() as u64;
        // absorb round-off: nT within 1e-9 of an integer counts as that integer
        if (nt - nt.round()).abs() < 1e-9 {
            k = nt.round() as u64;
        }
        let rest = self.horizon - k as f64 * h;
        (k, if rest > 1e-12 { rest } else { 0.0 })
    }
}

/// Left grid node `π_n(t) = ⌊nt⌋/n`.
pub fn grid_time(n: u64, t: f64, horizon: f64) -> Result<f64> {
    ensure(n >= 1, "n", || "n ≥ 1".into())?;
    ensure((0.0..=horizon).contains(&t), "t", || format!("t ∈ [0, {horizon}], got {t}"))?;
    let nt = n as f64 * t;
    let k = if (nt - nt.round()).abs() < 1e-9 { nt.round() } else { nt.floor() };
    Ok(k / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_time_examples() {
        assert_eq!(grid_time(4, 0.6, 1.0).unwrap(), 0.5);
        assert_eq!(grid_time(4, 0.75, 1.0).unwrap(), 0.75);
        assert_eq!(grid_time(4, 0.2, 1.0).unwrap(), 0.0);
        assert_eq!(grid_time(10, 0.3, 1.0).unwrap(), 0.3);
        assert!(grid_time(4, 1.5, 1.0).is_err());
        assert!(grid_time(4, -0.1, 1.0).is_err());
    }

    #[test]
    fn partial_last_step() {
        let c = EulerConfig {
            n: 4,
            horizon: 1.1,
            x0: vec![0.0],
            paths: 1,
            master_seed: 0,
        };
        let (k, rest) = c.steps();
        assert_eq!(k, 4);
        assert!((rest - 0.1).abs() < 1e-12);
        let c = EulerConfig { horizon: 0.3, n: 10, ..c };
        assert_eq!(c.steps(), (3, 0.0));
    }

    #[test]
    fn compiled_drift_matches_direct_evaluation() {
        use crate::besov::{DriftKind, Mollifier};
        for (dim, kind) in [(1, DriftKind::Componentwise), (2, DriftKind::DivergenceFree)] {
            let spec = DriftSpec::synthesize(0.2, 10, 1.0, 5, dim, kind).unwrap();
            let spec = spec.mollify(Mollifier::standard(dim).unwrap(), 64.0).unwrap();
            let fast = CompiledDrift::new(&spec);
            let (mut a, mut b) = (vec![0.0; dim], vec![0.0; dim]);
            for i in 0..500 {
                let x: Vec<f64> = (0..dim).map(|c| (i as f64 * 0.731 + c as f64).sin() * 40.0).collect();
                spec.evaluate_into(&x, &mut a);
                fast.eval(&x, &mut b);
                for (u, v) in a.iter().zip(&b) {
                    assert!((u - v).abs() < 1e-11 * spec.sup_bound(), "{u} vs {v}");
                }
            }
        }
    }
}
