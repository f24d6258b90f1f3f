//! Config-driven runner for the persuasion-chain engine.

pub mod commands;
pub mod config;
pub mod error;
pub mod format;

use std::fs;
use std::path::Path;

pub use commands::{run, Report};
pub use config::{ingest, Command, Format, HierarchyFile, RunConfig};
pub use error::CliError;

/// Writes `<command>.json` and `<command>.csv` into `dir`.
pub fn write_artifacts(report: &Report, dir: &Path) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Internal(format!("writing to {}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    let name = report.command.name();
    let json = serde_json::to_string_pretty(&report.json).map_err(|e| CliError::Internal(e.to_string()))?;
    fs::write(dir.join(format!("{name}.json")), json + "\n").map_err(io)?;
    fs::write(dir.join(format!("{name}.csv")), report.table.to_csv()).map_err(io)?;
    Ok(())
}
