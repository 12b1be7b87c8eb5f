use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use charcurv_cli::commands::{self, Outcome};
use charcurv_cli::config::{parse_config, Subcommand};
use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Verify,
    Curvature,
    Trajectory,
    Solve,
    Probe,
    Counterexample,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Verify => Self::Verify,
            Command::Curvature => Self::Curvature,
            Command::Trajectory => Self::Trajectory,
            Command::Solve => Self::Solve,
            Command::Probe => Self::Probe,
            Command::Counterexample => Self::Counterexample,
        }
    }
}

/// Characteristic curvature experiments.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    #[arg(value_enum)]
    subcommand: Command,
    /// Path to a `key = value` config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(args: Args) -> anyhow::Result<Outcome> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("cannot read {}", args.config.display()))?;
    let cfg = parse_config(&text).with_context(|| format!("in {}", args.config.display()))?;
    let out = args.out.unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
    commands::run(args.subcommand.into(), &cfg, &out)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(args) {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
