use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use stable_euler::harness::{self, ExperimentConfig, ExperimentKind, ExperimentReport};
use stable_euler::metrics::{theoretical_exponent, Regime, Verdict};
use stable_euler::stable_model::SpectralMeasure;
use stable_euler::Error;

#[derive(Parser)]
#[command(name = "stable-euler", version, about = "Weak-rate experiments for the Euler scheme with α-stable noise")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate endpoint populations for every n of the ladder.
    Simulate(RunArgs),
    /// Weak-error or increment-moment ladder with a fitted slope.
    Rates(RunArgs),
    /// Law distance between drifts b and b_m across an m-ladder.
    Stability(RunArgs),
    /// Property matrix of one module.
    Suite(SuiteArgs),
    /// Predicted exponent of n in the error bound.
    Exponent(ExponentArgs),
}

#[derive(Args)]
struct Overrides {
    /// Override the number of paths.
    #[arg(long)]
    paths: Option<usize>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config's `output`, else `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteKind {
    Kernel,
    Besov,
    Sampler,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long, value_enum)]
    kind: SuiteKind,
    /// Optional configuration supplying α and Σ.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Stability index when no configuration is given.
    #[arg(long, default_value_t = 1.5)]
    alpha: f64,
    /// Dimension of the uniform spectral measure when no configuration is given.
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Bounded,
    DistI,
    DistIi,
}

#[derive(Args)]
struct ExponentArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[arg(long, value_enum)]
    regime: RegimeArg,
}

enum Failure {
    Config(Error),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. } | Error::Degenerate { .. } | Error::Json(_) => Failure::Config(e),
            e => Failure::Runtime(e),
        }
    }
}

fn load(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig, Failure> {
    let mut config = ExperimentConfig::load(path).map_err(Failure::Config)?;
    apply(&mut config, overrides)?;
    Ok(config)
}

fn apply(config: &mut ExperimentConfig, overrides: &Overrides) -> Result<(), Failure> {
    if let Some(p) = overrides.paths {
        config.paths = p;
    }
    if let Some(s) = overrides.seed {
        config.seed = s;
    }
    config.validate().map_err(Failure::Config)
}

fn require_kind(config: &ExperimentConfig, allowed: &[ExperimentKind], command: &str) -> Result<(), Failure> {
    if allowed.contains(&config.kind) {
        Ok(())
    } else {
        Err(Failure::Config(Error::InvalidParameter {
            name: "kind",
            constraint: format!("`{command}` does not run {:?} experiments", config.kind),
        }))
    }
}

fn finish(report: ExperimentReport, out: &Path) -> Result<Verdict, Failure> {
    report.write_to(out).map_err(Failure::Runtime)?;
    println!("kind: {:?}", report.kind);
    if let Some(fit) = &report.fit {
        match fit.slope() {
            Some(s) => println!("fitted slope: {s:.4} ({} points used)", fit.used()),
            None => println!("fitted slope: none ({} points above the noise floor)", fit.used()),
        }
    }
    if let Some(e) = report.theoretical_exponent {
        println!("theoretical exponent: {e:.4}");
    }
    if let Some(st) = &report.stability {
        println!("spearman: {:?}, resolved rows: {}", st.spearman, st.resolved);
    }
    if let Some(s) = &report.suite {
        for c in s.checks.iter().filter(|c| !c.passed) {
            println!("FAIL {}: {:e} (threshold {:e}) {}", c.name, c.value, c.threshold, c.detail);
        }
        println!("checks: {} passed, {} failed", s.passed, s.failed);
    }
    println!("verdict: {:?}", report.verdict);
    println!("output: {}", out.display());
    Ok(report.verdict)
}

fn out_dir(out: Option<PathBuf>, config: &ExperimentConfig) -> PathBuf {
    out.or_else(|| config.output.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"))
}

fn execute(command: Command) -> Result<Verdict, Failure> {
    match command {
        Command::Simulate(a) => {
            let config = load(&a.config, &a.overrides)?;
            let report = harness::run_simulation(&config)?;
            finish(report, &out_dir(a.out, &config))
        }
        Command::Rates(a) => {
            let config = load(&a.config, &a.overrides)?;
            use ExperimentKind::*;
            require_kind(&config, &[BoundedRate, DistRateI, DistRateIi, MomentCheck], "rates")?;
            let report = harness::run(&config)?;
            finish(report, &out_dir(a.out, &config))
        }
        Command::Stability(a) => {
            let config = load(&a.config, &a.overrides)?;
            require_kind(&config, &[ExperimentKind::StabilityProbe], "stability")?;
            let report = harness::run(&config)?;
            finish(report, &out_dir(a.out, &config))
        }
        Command::Suite(a) => {
            let kind = match a.kind {
                SuiteKind::Kernel => ExperimentKind::KernelSuite,
                SuiteKind::Besov => ExperimentKind::BesovSuite,
                SuiteKind::Sampler => ExperimentKind::SamplerSuite,
            };
            let mut config = match &a.config {
                Some(p) => {
                    let mut c = ExperimentConfig::load(p).map_err(Failure::Config)?;
                    c.kind = kind;
                    c
                }
                None => {
                    let measure = SpectralMeasure::uniform(a.dim, 1.0).map_err(Failure::Config)?;
                    ExperimentConfig::suite(kind, a.alpha, measure, 1_000_000, 0)
                }
            };
            apply(&mut config, &a.overrides)?;
            let report = harness::run_suite(&config)?;
            finish(report, &out_dir(a.out, &config))
        }
        Command::Exponent(a) => {
            let regime = match a.regime {
                RegimeArg::Bounded => Regime::Bounded,
                RegimeArg::DistI => Regime::DistI,
                RegimeArg::DistIi => Regime::DistIi,
            };
            let e = theoretical_exponent(a.alpha, a.beta, a.gamma, a.theta, a.eps, regime).map_err(Failure::Config)?;
            println!("{e}");
            Ok(Verdict::Consistent)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot start {t} threads: {e}");
            return ExitCode::from(1);
        }
    }
    match execute(cli.command) {
        Ok(Verdict::Inconsistent) => ExitCode::from(1),
        Ok(_) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
