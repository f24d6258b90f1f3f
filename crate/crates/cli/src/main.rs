use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use persuasion_cli::config::{DEFAULT_GRID, DEFAULT_TRIALS};
use persuasion_cli::{run, write_artifacts, CliError, Command, Format, RunConfig};

/// Equilibria of hierarchical Bayesian persuasion chains.
#[derive(Parser)]
#[command(name = "persuade", version, about)]
struct Cli {
    command: Command,
    /// Hierarchy file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Grid resolution for oracle, compare and curve.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: u32,
    /// Monte Carlo trials.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
    /// Monte Carlo seed (required by simulate).
    #[arg(long)]
    seed: Option<u64>,
    /// Offset of the recommended threshold inside the admissible interval.
    #[arg(long)]
    delta: Option<f64>,
    /// Directory for `<command>.json` and `<command>.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn execute(cfg: &RunConfig) -> Result<(), CliError> {
    let report = run(cfg)?;
    match cfg.format {
        Format::Text => print!("{}", report.to_text()),
        Format::Csv => print!("{}", report.table.to_csv()),
    }
    if let Some(dir) = &cfg.out {
        write_artifacts(&report, dir)?;
    }
    match report.mismatch {
        Some(m) => Err(CliError::Mismatch(m)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let cfg = RunConfig {
        command: cli.command,
        config: cli.config,
        grid: cli.grid,
        trials: cli.trials,
        seed: cli.seed,
        delta: cli.delta,
        out: cli.out,
        format: cli.format,
    };
    match execute(&cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
