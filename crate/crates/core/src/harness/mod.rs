//! Experiment configuration, drivers and reports.

mod config;
mod experiments;
mod report;
mod suites;

pub use config::{power_of_two_level, DriftConfig, ExperimentConfig, ExperimentKind};
pub use experiments::{run, run_bounded_rate, run_dist_rate, run_moment_check, run_simulation, run_stability_probe, MOMENT_SLOPE_TOL, STABILITY_SPEARMAN};
pub use report::{
    CheckResult, Clock, ErrorRow, Estimator, ExperimentReport, RunMeta, SampleSet, ScaleProbe, StabilityRow,
    StabilitySummary, SuiteReport,
};
pub use suites::{mollification_slopes, run_suite, sampler_measures, self_similarity_residual, single_frequency_norm_error};
