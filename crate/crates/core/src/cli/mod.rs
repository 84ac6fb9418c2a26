//! Command-line driver: `poscomm run --config X`, one subcommand per
//! experiment kind, and `poscomm plot` for tabular extracts of reports.
//!
//! Exit status: 0 all checks pass, 1 some check fails, 2 usage or config
//! error, 3 numerical failure.

pub mod config;
pub mod report;
pub mod run;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

pub use config::{ExperimentConfig, FunctionSpec, Kind, SCHEMA};
pub use report::{plot_table, Check, Outcome, PlotKind, Report, REPORT_SCHEMA};

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "poscomm", version, about = "Positive commutator laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Report path; overrides the config's `output`. Without either, the
    /// report goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the config's `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Report written by `run`.
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long, value_enum)]
    pub what: PlotKind,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run any experiment config.
    Run(RunArgs),
    /// Extract a CSV table from a report.
    Plot(PlotArgs),
    BuildKernel(RunArgs),
    Spectrum(RunArgs),
    VerifyPair(RunArgs),
    TraceCheck(RunArgs),
    Rank1(RunArgs),
    Rank3(RunArgs),
    GammaRecover(RunArgs),
    Compose(RunArgs),
    LoewnerTest(RunArgs),
    FitMeasure(RunArgs),
    DerivAvg(RunArgs),
    StripCheck(RunArgs),
    MomentScan(RunArgs),
}

impl Command {
    fn kind(&self) -> Option<Kind> {
        Some(match self {
            Command::Run(_) | Command::Plot(_) => return None,
            Command::BuildKernel(_) => Kind::BuildKernel,
            Command::Spectrum(_) => Kind::Spectrum,
            Command::VerifyPair(_) => Kind::VerifyPair,
            Command::TraceCheck(_) => Kind::TraceCheck,
            Command::Rank1(_) => Kind::Rank1,
            Command::Rank3(_) => Kind::Rank3,
            Command::GammaRecover(_) => Kind::GammaRecover,
            Command::Compose(_) => Kind::Compose,
            Command::LoewnerTest(_) => Kind::LoewnerTest,
            Command::FitMeasure(_) => Kind::FitMeasure,
            Command::DerivAvg(_) => Kind::DerivAvg,
            Command::StripCheck(_) => Kind::StripCheck,
            Command::MomentScan(_) => Kind::MomentScan,
        })
    }
}

/// Parse, run and assemble the report for a loaded config.
pub fn execute(config: &ExperimentConfig) -> Result<Report> {
    let start = Instant::now();
    let outcome = run::run(config)?;
    let verdict = if outcome.passed() { "pass" } else { "fail" };
    Ok(Report {
        schema: REPORT_SCHEMA,
        version: env!("CARGO_PKG_VERSION"),
        kind: config.kind.name(),
        seed: config.seed,
        config: config.raw.clone(),
        verdict,
        checks: outcome.checks,
        sections: outcome.sections,
        timing: report::Timing {
            wall_seconds: start.elapsed().as_secs_f64(),
        },
    })
}

fn run_command(args: &RunArgs, expected: Option<Kind>) -> Result<i32> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(k) = expected {
        if config.kind != k {
            return Err(Error::Config {
                field: "kind".into(),
                message: format!(
                    "subcommand {} cannot run a {} config",
                    k.name(),
                    config.kind.name()
                ),
            });
        }
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    let report = execute(&config)?;
    let text = report.to_json()?;
    let dest = args
        .out
        .clone()
        .or_else(|| config.output.as_ref().map(|o| config.base_dir.join(o)));
    match dest {
        Some(p) => report::write_atomic(&p, &text)?,
        None => print!("{text}"),
    }
    for c in report.checks.iter().filter(|c| !c.verdict) {
        eprintln!("check failed: {} (lhs {}, rhs {})", c.name, c.lhs, c.rhs);
    }
    Ok(if report.passed() { 0 } else { 1 })
}

fn plot_command(args: &PlotArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&args.report).map_err(|e| Error::Config {
        field: "--report".into(),
        message: format!("{}: {e}", args.report.display()),
    })?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let table = plot_table(&value, args.what)?;
    match &args.out {
        Some(p) => report::write_atomic(Path::new(p), &table)?,
        None => print!("{table}"),
    }
    Ok(0)
}

/// Dispatch a parsed command line; returns the exit status.
pub fn dispatch(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Plot(a) => plot_command(a),
        Command::Run(a) => run_command(a, None),
        other => {
            let args = match other {
                Command::BuildKernel(a)
                | Command::Spectrum(a)
                | Command::VerifyPair(a)
                | Command::TraceCheck(a)
                | Command::Rank1(a)
                | Command::Rank3(a)
                | Command::GammaRecover(a)
                | Command::Compose(a)
                | Command::LoewnerTest(a)
                | Command::FitMeasure(a)
                | Command::DerivAvg(a)
                | Command::StripCheck(a)
                | Command::MomentScan(a) => a,
                Command::Run(_) | Command::Plot(_) => unreachable!(),
            };
            run_command(args, other.kind())
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn main() -> i32 {
    dispatch(&Cli::parse())
}
