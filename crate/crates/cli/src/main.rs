use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use hetnet_cli::config::Experiment;
use hetnet_cli::output::plot_path;
use hetnet_cli::{load_scenario, run_experiment, write_atomic, CliError, SEED_ENV};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExperimentArg {
    Curve,
    Compare,
    RateSweep,
    Threshold,
}

impl From<ExperimentArg> for Experiment {
    fn from(e: ExperimentArg) -> Self {
        match e {
            ExperimentArg::Curve => Experiment::Curve,
            ExperimentArg::Compare => Experiment::Compare,
            ExperimentArg::RateSweep => Experiment::RateSweep,
            ExperimentArg::Threshold => Experiment::Threshold,
        }
    }
}

/// Coverage and rate of pico and macro users in FFR/SFR two-tier networks.
#[derive(Debug, Parser)]
#[command(name = "hetnet-icic", version)]
struct Args {
    /// Experiment to run; overrides the config's `experiment` key.
    experiment: ExperimentArg,

    /// Scenario file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,

    /// Replace one config key, applied after the file and HETNET_SEED.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// CSV destination; stdout when neither this nor `output` is set.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Also write a wide per-series table next to the CSV (`<stem>.plot.csv`).
    #[arg(long)]
    plot_data: bool,

    /// Use the printed denominator for the PS1 cell-centre macro-user CP.
    #[arg(long)]
    paper_literal: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(args: Args) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|source| CliError::Io {
        context: format!("reading {}", args.config.display()),
        source,
    })?;
    let env_seed = std::env::var(SEED_ENV).ok();
    let mut cfg = load_scenario(&text, env_seed.as_deref(), &args.overrides)?;
    cfg.experiment = args.experiment.into();
    cfg.paper_literal = args.paper_literal;
    if args.out.is_some() {
        cfg.output = args.out;
    }
    if args.plot_data && cfg.output.is_none() {
        return Err(CliError::Invalid(vec!["--plot-data needs an output path (--out or `output`)".into()]));
    }

    let report = run_experiment(&cfg)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    match &cfg.output {
        Some(path) => {
            write_atomic(path, &report.csv)?;
            if args.plot_data {
                write_atomic(&plot_path(path), &report.plot)?;
            }
        }
        // The threshold summary already says everything the CSV would.
        None if report.summary.is_empty() => print!("{}", report.csv),
        None => {}
    }
    for line in &report.summary {
        println!("{line}");
    }
    Ok(report.exit_code)
}
