//! Experiment configuration and its validation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::besov::{DriftKind, DriftSpec, Mollifier};
use crate::error::{ensure, Error, Result};
use crate::euler::{CompiledDrift, ConstantDrift, Drift, SineDrift, ZeroDrift};
use crate::metrics::{theoretical_exponent, Regime};
use crate::stable_model::{SpectralMeasure, StableSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    BoundedRate,
    DistRateI,
    DistRateIi,
    MomentCheck,
    KernelSuite,
    BesovSuite,
    SamplerSuite,
    StabilityProbe,
}

impl ExperimentKind {
    pub fn is_suite(self) -> bool {
        matches!(self, Self::KernelSuite | Self::BesovSuite | Self::SamplerSuite)
    }
}

/// Drift descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DriftConfig {
    Zero,
    Constant {
        value: Vec<f64>,
    },
    /// `b_i(x) = A sin(x_i)`.
    Sine {
        amplitude: f64,
    },
    /// Lacunary drift `Σ_{j≤J} A 2^{βj} cos(k_j·x + φ_j) v_j` in `B^{−β}_{∞,∞}`.
    Lacunary {
        beta: f64,
        levels: i32,
        #[serde(default = "unit")]
        amplitude: f64,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        divergence_free: bool,
    },
}

fn unit() -> f64 {
    1.0
}

impl DriftConfig {
    pub fn is_bounded(&self) -> bool {
        !matches!(self, DriftConfig::Lacunary { .. })
    }

    /// `β` of a lacunary drift.
    pub fn beta(&self) -> Option<f64> {
        match self {
            DriftConfig::Lacunary { beta, .. } => Some(*beta),
            _ => None,
        }
    }

    /// The drift multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        match self.clone() {
            DriftConfig::Zero => DriftConfig::Zero,
            DriftConfig::Constant { value } => DriftConfig::Constant {
                value: value.iter().map(|v| v * lambda).collect(),
            },
            DriftConfig::Sine { amplitude } => DriftConfig::Sine {
                amplitude: amplitude * lambda,
            },
            DriftConfig::Lacunary {
                beta,
                levels,
                amplitude,
                seed,
                divergence_free,
            } => DriftConfig::Lacunary {
                beta,
                levels,
                amplitude: amplitude * lambda,
                seed,
                divergence_free,
            },
        }
    }

    /// The closed-form bounded drift.
    pub fn bounded(&self, dim: usize) -> Result<Box<dyn Drift>> {
        Ok(match self {
            DriftConfig::Zero => Box::new(ZeroDrift { dim }),
            DriftConfig::Constant { value } => {
                ensure(value.len() == dim, "drift", || {
                    format!("constant drift has {} components, the noise {dim}", value.len())
                })?;
                Box::new(ConstantDrift { value: value.clone() })
            }
            DriftConfig::Sine { amplitude } => Box::new(SineDrift {
                dim,
                amplitude: *amplitude,
            }),
            DriftConfig::Lacunary { .. } => {
                return Err(Error::invalid("drift", "a bounded closed-form drift is required"));
            }
        })
    }

    /// The lacunary drift `b`.
    pub fn lacunary(&self, dim: usize) -> Result<DriftSpec> {
        match self {
            DriftConfig::Lacunary {
                beta,
                levels,
                amplitude,
                seed,
                divergence_free,
            } => {
                let kind = if *divergence_free {
                    DriftKind::DivergenceFree
                } else {
                    DriftKind::Componentwise
                };
                DriftSpec::synthesize(*beta, *levels, *amplitude, *seed, dim, kind)
            }
            _ => Err(Error::invalid("drift", "a lacunary drift is required")),
        }
    }

    /// `b * φ_m` in evaluation form.
    pub fn mollified(&self, dim: usize, m: f64) -> Result<CompiledDrift> {
        let b = self.lacunary(dim)?;
        Ok(CompiledDrift::new(&b.mollify(Mollifier::standard(dim)?, m)?))
    }
}

/// One experiment, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub alpha: f64,
    pub measure: SpectralMeasure,
    #[serde(default = "zero_drift")]
    pub drift: DriftConfig,
    #[serde(default)]
    pub n_ladder: Vec<u64>,
    /// Mollification levels of the stability probe.
    #[serde(default)]
    pub m_ladder: Vec<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "unit")]
    pub horizon: f64,
    /// Observation time; defaults to the horizon.
    #[serde(default)]
    pub t_obs: Option<f64>,
    pub paths: usize,
    /// `n_ref = reference_multiplier · max(n_ladder)`.
    #[serde(default = "default_multiplier")]
    pub reference_multiplier: u64,
    pub seed: u64,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    /// Slack of the one-sided verdict `slope ≤ exponent + slack`.
    #[serde(default = "default_slack")]
    pub slack: f64,
    /// Reruns the bounded-rate ladder with the drift scaled by this factor.
    #[serde(default)]
    pub drift_scale_probe: Option<f64>,
    /// Moment order of the moment check; defaults to `α/2`.
    #[serde(default)]
    pub moment_order: Option<f64>,
    #[serde(default)]
    pub save_samples: bool,
    #[serde(default)]
    pub output: Option<String>,
}

fn zero_drift() -> DriftConfig {
    DriftConfig::Zero
}

fn default_epsilon() -> f64 {
    0.05
}

fn default_multiplier() -> u64 {
    16
}

fn default_slack() -> f64 {
    0.3
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Minimal configuration for a suite run.
    pub fn suite(kind: ExperimentKind, alpha: f64, measure: SpectralMeasure, paths: usize, seed: u64) -> Self {
        ExperimentConfig {
            kind,
            alpha,
            measure,
            drift: DriftConfig::Zero,
            n_ladder: Vec::new(),
            m_ladder: Vec::new(),
            gamma: None,
            theta: None,
            epsilon: default_epsilon(),
            horizon: 1.0,
            t_obs: None,
            paths,
            reference_multiplier: default_multiplier(),
            seed,
            x0: None,
            slack: default_slack(),
            drift_scale_probe: None,
            moment_order: None,
            save_samples: false,
            output: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.measure.dim()
    }

    pub fn stable_spec(&self) -> Result<StableSpec> {
        StableSpec::new(self.alpha, self.measure.clone())
    }

    pub fn observation_time(&self) -> f64 {
        self.t_obs.unwrap_or(self.horizon)
    }

    pub fn initial_point(&self) -> Vec<f64> {
        self.x0.clone().unwrap_or_else(|| vec![0.0; self.dim()])
    }

    pub fn n_ref(&self) -> u64 {
        self.reference_multiplier * self.n_ladder.last().copied().unwrap_or(1)
    }

    pub fn regime(&self) -> Option<Regime> {
        match self.kind {
            ExperimentKind::BoundedRate => Some(Regime::Bounded),
            ExperimentKind::DistRateI => Some(Regime::DistI),
            ExperimentKind::DistRateIi => Some(Regime::DistIi),
            _ => None,
        }
    }

    /// `θ` of the regime-(i) bound and of the stability norm; defaults to
    /// `α − 1 − β − αε`.
    pub fn theta_or_default(&self) -> Option<f64> {
        let beta = self.drift.beta()?;
        Some(self.theta.unwrap_or(self.alpha - 1.0 - beta - self.alpha * self.epsilon))
    }

    /// Predicted exponent for the rate kinds.
    pub fn theoretical_exponent(&self) -> Result<Option<f64>> {
        let Some(regime) = self.regime() else {
            return Ok(None);
        };
        let e = match regime {
            Regime::Bounded => theoretical_exponent(self.alpha, 0.0, 0.0, 0.0, 0.0, regime)?,
            _ => {
                let beta = self.drift.beta().ok_or_else(|| Error::invalid("drift", "a lacunary drift is required"))?;
                let gamma = self.gamma.ok_or_else(|| Error::invalid("gamma", "γ is required for distributional rates"))?;
                let theta = self.theta_or_default().unwrap_or(0.0);
                theoretical_exponent(self.alpha, beta, gamma, theta, self.epsilon, regime)?
            }
        };
        Ok(Some(e))
    }

    /// Checks every constraint of the chosen kind; the error names the
    /// violated inequality.
    pub fn validate(&self) -> Result<()> {
        let spec = StableSpec::new(self.alpha, self.measure.clone())?;
        let d = self.dim();
        ensure(d == 1 || d == 2, "measure", || format!("d ∈ {{1, 2}}, got {d}"))?;
        if let crate::stable_model::Nondegeneracy::Degenerate { witness } = spec.nondegeneracy()? {
            let value = self.measure.projection_mass(&witness);
            return Err(Error::Degenerate { witness, value });
        }
        ensure(self.paths >= 2, "paths", || format!("N ≥ 2, got {}", self.paths))?;
        if self.kind.is_suite() {
            return Ok(());
        }
        ensure(self.horizon > 0.0 && self.horizon.is_finite(), "horizon", || {
            format!("0 < T < ∞, got {}", self.horizon)
        })?;
        let t = self.observation_time();
        ensure(t > 0.0 && t <= self.horizon, "t_obs", || format!("0 < t_obs ≤ T = {}, got {t}", self.horizon))?;
        ensure(self.x0.as_ref().map_or(true, |x| x.len() == d), "x0", || format!("x0 must have {d} components"))?;
        ensure(!self.n_ladder.is_empty(), "n_ladder", || "at least one n".into())?;
        ensure(self.n_ladder[0] >= 1, "n_ladder", || "n ≥ 1".into())?;
        ensure(self.n_ladder.windows(2).all(|w| w[0] < w[1]), "n_ladder", || {
            "n-ladder must be strictly increasing".into()
        })?;
        ensure(self.reference_multiplier >= 2, "reference_multiplier", || {
            format!("reference multiplier ≥ 2, got {}", self.reference_multiplier)
        })?;
        let n_ref = self.n_ref();
        ensure(self.n_ladder.iter().all(|n| n_ref % n == 0), "n_ladder", || {
            format!("every n must divide n_ref = {n_ref}")
        })?;
        ensure(self.slack >= 0.0, "slack", || format!("slack ≥ 0, got {}", self.slack))?;
        match self.kind {
            ExperimentKind::BoundedRate | ExperimentKind::MomentCheck => {
                self.drift.bounded(d)?;
                if let Some(l) = self.drift_scale_probe {
                    ensure(l > 0.0 && l.is_finite(), "drift_scale_probe", || format!("λ > 0, got {l}"))?;
                }
                if let Some(p) = self.moment_order {
                    ensure(p > 0.0 && p < self.alpha, "moment_order", || format!("0 < p < α, got {p}"))?;
                }
            }
            ExperimentKind::DistRateI | ExperimentKind::DistRateIi => {
                self.drift.lacunary(d)?;
                if self.kind == ExperimentKind::DistRateIi {
                    ensure(
                        matches!(self.drift, DriftConfig::Lacunary { divergence_free: true, .. }) && d == 2,
                        "drift",
                        || "regime (ii) needs a divergence-free drift in d = 2".into(),
                    )?;
                }
            }
            ExperimentKind::StabilityProbe => {
                self.drift.lacunary(d)?;
                ensure(self.m_ladder.len() >= 2, "m_ladder", || "at least two mollification levels".into())?;
                ensure(self.m_ladder.iter().all(|m| *m > 0.0 && m.is_finite()), "m_ladder", || "m > 0".into())?;
                ensure(self.m_ladder.windows(2).all(|w| w[0] < w[1]), "m_ladder", || {
                    "m-ladder must be strictly increasing".into()
                })?;
                let beta = self.drift.beta().unwrap_or(0.0);
                let theta = self.theta_or_default().unwrap_or(0.0);
                ensure(theta > beta, "theta", || format!("θ > β = {beta} violated: θ = {theta}"))?;
            }
            _ => {}
        }
        self.theoretical_exponent()?;
        Ok(())
    }
}

/// `2^{round(log₂ x)}`, the mollification level actually used for `m = n^γ`.
pub fn power_of_two_level(x: f64) -> f64 {
    x.log2().round().exp2().max(1.0)
}
