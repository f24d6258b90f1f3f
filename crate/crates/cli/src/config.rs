//! Hierarchy files and run settings.

use std::fs;
use std::path::{Path, PathBuf};

use persuasion_core::agents::{AgentSpec, HierarchySpec, LinearUtility, TableUtility};
use persuasion_core::experiment::Experiment;
use persuasion_core::outcome::Prior;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::error::CliError;

/// On-disk hierarchy: `{prior, receiver, senders[], experiments?}`.
///
/// Each agent is `{label, model: "table" | "linear", params}`. Table params are
/// `u00, u10, u01, u11` with `u{state}{action}`; linear params are `alpha, beta`
/// for a gain of `alpha * w + beta` from action 1. `experiments`, if present,
/// holds one row-stochastic matrix per sender for `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HierarchyFile {
    pub prior: Prior,
    pub receiver: AgentSpec,
    pub senders: Vec<AgentSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiments: Option<Vec<Experiment>>,
}

impl HierarchyFile {
    pub fn from_hierarchy(h: &HierarchySpec) -> Self {
        Self { prior: h.prior, receiver: h.receiver.clone(), senders: h.senders.clone(), experiments: None }
    }

    pub fn hierarchy(&self) -> Result<HierarchySpec, CliError> {
        Ok(HierarchySpec::new(self.prior, self.senders.clone(), self.receiver.clone())?)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile<'a> {
    prior: Prior,
    #[serde(borrow)]
    receiver: RawAgent<'a>,
    #[serde(borrow)]
    senders: Vec<RawAgent<'a>>,
    #[serde(default)]
    experiments: Option<Vec<Experiment>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAgent<'a> {
    label: String,
    model: Model,
    #[serde(borrow)]
    params: &'a RawValue,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum Model {
    Table,
    Linear,
}

fn parse_error(e: serde_path_to_error::Error<serde_json::Error>, field: String, line: usize, column: usize) -> CliError {
    let inner = e.into_inner();
    CliError::Parse { line, column, field, message: inner.to_string() }
}

fn parse_params<T: DeserializeOwned>(text: &str, raw: &RawValue, at: &str) -> Result<T, CliError> {
    let fragment = raw.get();
    let mut de = serde_json::Deserializer::from_str(fragment);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let offset = fragment.as_ptr() as usize - text.as_ptr() as usize;
        let before = &text[..offset];
        let base_line = before.matches('\n').count() + 1;
        let base_column = offset - before.rfind('\n').map_or(0, |k| k + 1);
        let inner = e.inner();
        let (line, column) = if inner.line() <= 1 {
            (base_line, base_column + inner.column())
        } else {
            (base_line + inner.line() - 1, inner.column())
        };
        let rel = e.path().to_string();
        let field = if rel == "." { format!("{at}.params") } else { format!("{at}.params.{rel}") };
        parse_error(e, field, line, column)
    })
}

fn agent(text: &str, raw: &RawAgent, at: &str) -> Result<AgentSpec, CliError> {
    Ok(match raw.model {
        Model::Table => AgentSpec::table(raw.label.clone(), parse_params::<TableUtility>(text, raw.params, at)?),
        Model::Linear => AgentSpec::linear(raw.label.clone(), parse_params::<LinearUtility>(text, raw.params, at)?),
    })
}

/// Parses hierarchy text, reporting the line, column and field path of the first problem.
pub fn parse(text: &str) -> Result<HierarchyFile, CliError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let raw: RawFile = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        let (line, column) = (e.inner().line(), e.inner().column());
        parse_error(e, field, line, column)
    })?;
    let senders = raw
        .senders
        .iter()
        .enumerate()
        .map(|(k, a)| agent(text, a, &format!("senders[{k}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(HierarchyFile {
        prior: raw.prior,
        receiver: agent(text, &raw.receiver, "receiver")?,
        senders,
        experiments: raw.experiments,
    })
}

/// Reads and validates a hierarchy file.
pub fn ingest(path: &Path) -> Result<(HierarchySpec, HierarchyFile), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let file = parse(&text)?;
    let h = file.hierarchy()?;
    if let Some(exps) = &file.experiments {
        if exps.len() != h.n() {
            return Err(CliError::Validation(format!(
                "experiments: expected one per sender ({}), got {}",
                h.n(),
                exps.len()
            )));
        }
    }
    Ok((h, file))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Agent kinds, thresholds and pivotal agents.
    Classify,
    /// Closed-form equilibrium.
    Solve,
    /// Grid equilibrium and incentive-compatible sets.
    Oracle,
    /// Closed form against the grid oracle.
    Compare,
    /// Vice-president recommendation.
    Vp,
    /// Monte Carlo payoffs against the analytic values.
    Simulate,
    /// Player 1's value along the spread-0.5 line (uniform prior).
    Curve,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Solve => "solve",
            Command::Oracle => "oracle",
            Command::Compare => "compare",
            Command::Vp => "vp",
            Command::Simulate => "simulate",
            Command::Curve => "curve",
        }
    }

    pub fn uses_grid(self) -> bool {
        matches!(self, Command::Oracle | Command::Compare | Command::Curve)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub config: PathBuf,
    pub grid: u32,
    pub trials: u64,
    pub seed: Option<u64>,
    pub delta: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

pub const DEFAULT_GRID: u32 = 100;
pub const DEFAULT_TRIALS: u64 = 100_000;
pub const MIN_GRID: u32 = 10;

impl RunConfig {
    pub fn new(command: Command, config: impl Into<PathBuf>) -> Self {
        Self {
            command,
            config: config.into(),
            grid: DEFAULT_GRID,
            trials: DEFAULT_TRIALS,
            seed: None,
            delta: None,
            out: None,
            format: Format::Text,
        }
    }

    pub fn check(&self) -> Result<(), CliError> {
        if self.command == Command::Simulate && self.seed.is_none() {
            return Err(CliError::Validation("simulate needs --seed".into()));
        }
        if self.command.uses_grid() && self.grid < MIN_GRID {
            return Err(CliError::Validation(format!("--grid must be at least {MIN_GRID}, got {}", self.grid)));
        }
        if self.trials == 0 {
            return Err(CliError::Validation("--trials must be positive".into()));
        }
        Ok(())
    }
}
