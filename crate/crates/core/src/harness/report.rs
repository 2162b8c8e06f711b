//! Experiment reports and their files.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use crate::error::Result;
use crate::euler::{content_hash, write_binary, MomentReport};
use crate::metrics::{RateFit, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Dictionary weak error against the reference, paired CI.
    Dictionary,
    /// Histogram total variation (no CI).
    Histogram,
    /// Dictionary weak error of the scaled-drift ladder.
    DictionaryScaled,
    /// Mid-step increment moment.
    Moment,
}

impl Estimator {
    fn as_str(self) -> &'static str {
        match self {
            Estimator::Dictionary => "dictionary",
            Estimator::Histogram => "histogram",
            Estimator::DictionaryScaled => "dictionary_scaled",
            Estimator::Moment => "moment",
        }
    }
}

/// One line of the per-n error table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRow {
    pub n: u64,
    /// Mollification level used at this `n`.
    pub m: Option<f64>,
    pub error: f64,
    /// 95% half-width used by the noise-floor rule.
    pub ci: Option<f64>,
    /// Half-width had the two laws been sampled independently.
    pub ci_independent: Option<f64>,
    pub estimator: Estimator,
    /// `Δ log error / Δ log n` from the previous row of the same estimator.
    pub slope_partial: Option<f64>,
    /// Maximizing dictionary function.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

/// Errors of the ladder rerun with the drift scaled by `scale`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleProbe {
    pub scale: f64,
    /// `(n, error with b, error with scale·b)`.
    pub errors: Vec<(u64, f64, f64)>,
    /// Every scaled error exceeds its unscaled counterpart.
    pub increased: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityRow {
    pub m: f64,
    /// Dictionary distance between the laws with `b` and with `b_m`.
    pub proxy: f64,
    pub ci: f64,
    pub tv_histogram: f64,
    /// `‖b − b_m‖_{B^{−θ}_{∞,∞}}`.
    pub norm_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilitySummary {
    pub n: u64,
    pub theta: f64,
    pub rows: Vec<StabilityRow>,
    /// Rows whose proxy clears the noise floor.
    pub resolved: usize,
    pub spearman: Option<f64>,
    /// Log-log slope of the norm difference against `m`.
    pub norm_slope: f64,
    /// `−(θ − β)`.
    pub expected_norm_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub kind: ExperimentKind,
    pub checks: Vec<CheckResult>,
    pub passed: usize,
    pub failed: usize,
}

/// Population saved as `samples-<label>.bin`.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub label: String,
    pub dim: usize,
    pub time: f64,
    pub data: Vec<f64>,
}

/// Wall-clock and environment fields, kept out of `report.json` so that
/// reports are byte-identical across runs.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunMeta {
    pub version: String,
    pub started_unix: u64,
    pub wall_clock_secs: f64,
    pub threads: usize,
    pub os: String,
    pub arch: String,
    pub log: Vec<String>,
}

/// Running log plus timing of one experiment.
pub struct Clock {
    start: Instant,
    meta: RunMeta,
}

impl Clock {
    pub fn start() -> Self {
        Clock {
            start: Instant::now(),
            meta: RunMeta {
                version: env!("CARGO_PKG_VERSION").to_string(),
                started_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
                threads: rayon::current_num_threads(),
                os: std::env::consts::OS.to_string(),
                arch: std::env::consts::ARCH.to_string(),
                ..RunMeta::default()
            },
        }
    }

    pub fn log(&mut self, line: impl Into<String>) {
        let line = format!("[{:9.3}s] {}", self.start.elapsed().as_secs_f64(), line.into());
        self.meta.log.push(line);
    }

    pub fn finish(mut self) -> RunMeta {
        self.meta.wall_clock_secs = self.start.elapsed().as_secs_f64();
        self.meta
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub dim: usize,
    pub paths: usize,
    pub n_ref: Option<u64>,
    pub m_ref: Option<f64>,
    pub rows: Vec<ErrorRow>,
    pub fit: Option<RateFit>,
    pub theoretical_exponent: Option<f64>,
    pub verdict: Verdict,
    pub scale_probe: Option<ScaleProbe>,
    pub stability: Option<StabilitySummary>,
    pub moments: Option<MomentReport>,
    pub suite: Option<SuiteReport>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub samples: Vec<SampleSet>,
    #[serde(skip)]
    pub meta: RunMeta,
}

impl ExperimentReport {
    pub fn new(config: &ExperimentConfig, verdict: Verdict) -> Self {
        let value = serde_json::to_value(config).expect("config serializes");
        ExperimentReport {
            kind: config.kind,
            config: config.clone(),
            config_hash: content_hash(&value),
            dim: config.dim(),
            paths: config.paths,
            n_ref: None,
            m_ref: None,
            rows: Vec::new(),
            fit: None,
            theoretical_exponent: None,
            verdict,
            scale_probe: None,
            stability: None,
            moments: None,
            suite: None,
            notes: Vec::new(),
            samples: Vec::new(),
            meta: RunMeta::default(),
        }
    }

    /// Rows of one estimator, in ladder order.
    pub fn rows_of(&self, estimator: Estimator) -> impl Iterator<Item = &ErrorRow> {
        self.rows.iter().filter(move |r| r.estimator == estimator)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// The error table as CSV: `n,m,error,ci,estimator,slope_partial`.
    pub fn errors_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        let mut s = String::from("n,m,error,ci,estimator,slope_partial\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{:e},{},{},{}\n",
                r.n,
                opt(r.m),
                r.error,
                opt(r.ci),
                r.estimator.as_str(),
                opt(r.slope_partial)
            ));
        }
        if let Some(st) = &self.stability {
            s.push_str("\nm,proxy,ci,tv_histogram,norm_difference\n");
            for r in &st.rows {
                s.push_str(&format!("{:e},{:e},{:e},{:e},{:e}\n", r.m, r.proxy, r.ci, r.tv_histogram, r.norm_difference));
            }
        }
        s
    }

    /// Writes `report.json`, `errors.csv`, `meta.json`, `log.txt` and the
    /// saved populations into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), self.to_json())?;
        fs::write(dir.join("errors.csv"), self.errors_csv())?;
        let mut meta = serde_json::to_string_pretty(&self.meta)?;
        meta.push('\n');
        fs::write(dir.join("meta.json"), meta)?;
        let mut log = self.meta.log.join("\n");
        log.push('\n');
        fs::write(dir.join("log.txt"), log)?;
        for s in &self.samples {
            let f = fs::File::create(dir.join(format!("samples-{}.bin", s.label)))?;
            let mut w = BufWriter::new(f);
            write_binary(&mut w, &s.data, s.dim, s.time)?;
            w.flush()?;
        }
        Ok(())
    }
}
