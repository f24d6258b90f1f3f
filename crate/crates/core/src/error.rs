use thiserror::Error;

/// Errors raised by the persuasion engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("posteriors out of order: need 0 <= q0 <= p <= q1 <= 1, got q0={q0}, p={p}, q1={q1}")]
    OrderViolation { q0: f64, p: f64, q1: f64 },
    #[error("spread m1 - m0 = {0} exceeds the feasible bound 0.5 under a uniform prior")]
    InfeasibleSpread(f64),
    #[error("outcomes anchored at different priors ({0} vs {1})")]
    PriorMismatch(f64, f64),
    #[error("prior must lie strictly inside (0, 1), got {0}")]
    InvalidPrior(f64),
    #[error("dimension mismatch: {left} output columns vs {right} input rows")]
    DimensionMismatch { left: usize, right: usize },
    #[error("experiment is not row-stochastic: {0}")]
    NotStochastic(String),
    #[error("signal {0} has zero marginal probability")]
    ZeroProbabilitySignal(usize),
    #[error("agent `{0}` is degenerate: its action preference never switches")]
    DegenerateAgent(String),
    #[error("{0}")]
    ThresholdCollision(String),
    #[error("{0}")]
    Validation(String),
    #[error("receiver is an extremist")]
    ExtremistReceiver,
    #[error("no conformist with an interior threshold")]
    NoConformist,
    #[error("configuration not covered by the closed form: {0}")]
    NotCovered(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("grid resolution {0} is too coarse (need at least 10)")]
    ResolutionTooCoarse(u32),
    #[error("outcome ({q0}, {q1}) is not on the grid")]
    OffGrid { q0: f64, q1: f64 },
    #[error("no improvement available: {0}")]
    NoImprovement(String),
    #[error("a seed is required for simulation")]
    SeedRequired,
    #[error("empty incentive-compatible set")]
    EmptyGamma,
}

pub type Result<T> = std::result::Result<T, Error>;
