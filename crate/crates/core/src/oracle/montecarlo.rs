use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::agents::{AgentSpec, HierarchySpec};
use crate::binary_solver::ReceiverRule;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::experiment::{compose_chain, posteriors, Experiment};
use crate::general_solver::MeanRule;
use crate::outcome::{BinaryOutcome, BinaryPrior, Prior};

/// Trials per independently seeded stream.
pub const BATCH: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentEstimate {
    pub label: String,
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub trials: u64,
    pub seed: u64,
    /// Senders 1..n, then the receiver.
    pub agents: Vec<AgentEstimate>,
}

#[derive(Clone)]
struct Sums {
    total: Vec<f64>,
    squares: Vec<f64>,
}

impl Sums {
    fn new(k: usize) -> Self {
        Self { total: vec![0.0; k], squares: vec![0.0; k] }
    }

    fn add(&mut self, payoffs: impl Iterator<Item = f64>) {
        for (k, v) in payoffs.enumerate() {
            self.total[k] += v;
            self.squares[k] += v * v;
        }
    }

    fn merge(mut self, other: &Sums) -> Self {
        for k in 0..self.total.len() {
            self.total[k] += other.total[k];
            self.squares[k] += other.squares[k];
        }
        self
    }
}

fn agents(h: &HierarchySpec) -> Vec<&AgentSpec> {
    h.senders.iter().chain(std::iter::once(&h.receiver)).collect()
}

fn run_batches<F>(h: &HierarchySpec, trials: u64, seed: u64, exec: Execution, trial: F) -> MonteCarloReport
where
    F: Fn(&mut ChaCha8Rng, &mut Sums) + Sync + Send,
{
    let k = h.n() + 1;
    let batches = trials.div_ceil(BATCH) as usize;
    let partial = exec.map_range(batches, |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        let count = BATCH.min(trials - b as u64 * BATCH);
        let mut sums = Sums::new(k);
        for _ in 0..count {
            trial(&mut rng, &mut sums);
        }
        sums
    });
    let sums = partial.iter().fold(Sums::new(k), |acc, s| acc.merge(s));
    let nf = trials as f64;
    let estimates = agents(h)
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let mean = sums.total[i] / nf;
            let var = (sums.squares[i] / nf - mean * mean).max(0.0);
            AgentEstimate { label: a.label.clone(), mean, std_error: (var / nf).sqrt() }
        })
        .collect();
    MonteCarloReport { trials, seed, agents: estimates }
}

fn draw(rng: &mut ChaCha8Rng, row: &[f64]) -> usize {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    for (s, &w) in row.iter().enumerate() {
        acc += w;
        if r < acc {
            return s;
        }
    }
    row.iter().rposition(|&w| w > 0.0).unwrap_or(row.len() - 1)
}

/// Draws the binary state, passes signals through `experiments` (one per sender),
/// lets the receiver act on the final posterior and averages everyone's payoff.
pub fn monte_carlo(
    h: &HierarchySpec,
    experiments: &[Experiment],
    trials: u64,
    seed: Option<u64>,
    exec: Execution,
) -> Result<MonteCarloReport> {
    let seed = seed.ok_or(Error::SeedRequired)?;
    let p = match h.prior {
        Prior::Binary { p } => p,
        Prior::Uniform => return Err(Error::Unsupported("use the uniform-prior simulator".into())),
    };
    if experiments.len() != h.n() {
        return Err(Error::Validation(format!("expected {} experiments, got {}", h.n(), experiments.len())));
    }
    if trials == 0 {
        return Err(Error::Validation("trials must be positive".into()));
    }
    if experiments[0].rows() != 2 {
        return Err(Error::DimensionMismatch { left: 2, right: experiments[0].rows() });
    }
    let composed = compose_chain(experiments)?;
    let rule = ReceiverRule::for_hierarchy(h);
    let actions: Vec<_> = posteriors(BinaryPrior::new(p)?, &composed)?
        .into_iter()
        .map(|q| q.map(|q| rule.action(q)))
        .collect();
    let tables: Vec<_> = agents(h).iter().map(|a| a.utility.table()).collect();
    Ok(run_batches(h, trials, seed, exec, |rng, sums| {
        let state_one = rng.random::<f64>() < p;
        let mut s = usize::from(state_one);
        for e in experiments {
            s = draw(rng, e.row(s));
        }
        let a = actions[s].expect("a realized signal has positive probability");
        sums.add(tables.iter().map(|t| t.payoff(state_one, a)));
    }))
}

/// Uniform-prior version: player 1 reveals whether the state is above the cut `2 * m0`
/// (or nothing for `{0.5}`), the others pass it on, and payoffs are `a * (alpha * w + beta)`.
pub fn monte_carlo_general(
    h: &HierarchySpec,
    support: &BinaryOutcome,
    trials: u64,
    seed: Option<u64>,
    exec: Execution,
) -> Result<MonteCarloReport> {
    let seed = seed.ok_or(Error::SeedRequired)?;
    if !h.prior.is_uniform() {
        return Err(Error::Unsupported("uniform-prior simulator needs a uniform prior".into()));
    }
    if trials == 0 {
        return Err(Error::Validation("trials must be positive".into()));
    }
    let cut = if support.is_degenerate() {
        None
    } else if (support.q1 - support.q0 - 0.5).abs() <= 1e-9 {
        Some(2.0 * support.q0)
    } else {
        return Err(Error::Unsupported("only cut outcomes with m1 - m0 = 0.5 can be simulated".into()));
    };
    let rule = MeanRule::for_hierarchy(h)?;
    let lines = agents(h)
        .iter()
        .map(|a| a.utility.linear().ok_or_else(|| Error::Unsupported(format!("agent {} is not linear", a.label))))
        .collect::<Result<Vec<_>>>()?;
    let (low, high) = match cut {
        Some(x) => (rule.action(x / 2.0), rule.action((1.0 + x) / 2.0)),
        None => (rule.action(0.5), rule.action(0.5)),
    };
    Ok(run_batches(h, trials, seed, exec, |rng, sums| {
        let w: f64 = rng.random();
        let a = match cut {
            Some(x) if w >= x => high,
            _ => low,
        };
        sums.add(lines.iter().map(|l| if a.is_one() { l.alpha * w + l.beta } else { 0.0 }));
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::TableUtility;

    fn h() -> HierarchySpec {
        let r = AgentSpec::table("r", TableUtility::quadratic_loss(0.0));
        let s = AgentSpec::table("s", TableUtility::quadratic_loss(-0.5));
        HierarchySpec::new(Prior::binary(0.6).unwrap(), vec![s], r).unwrap()
    }

    #[test]
    fn seed_is_mandatory() {
        let e = vec![Experiment::identity(2)];
        assert!(matches!(monte_carlo(&h(), &e, 10, None, Execution::Sequential), Err(Error::SeedRequired)));
    }

    #[test]
    fn modes_are_bit_identical() {
        let e = vec![Experiment::new(vec![vec![0.7, 0.3], vec![0.2, 0.8]]).unwrap()];
        let a = monte_carlo(&h(), &e, 35_000, Some(9), Execution::Sequential).unwrap();
        let b = monte_carlo(&h(), &e, 35_000, Some(9), Execution::Parallel).unwrap();
        assert_eq!(a, b);
        let c = monte_carlo(&h(), &e, 35_000, Some(10), Execution::Sequential).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn full_revelation_gives_zero_loss() {
        let report = monte_carlo(&h(), &[Experiment::identity(2)], 20_000, Some(1), Execution::Sequential).unwrap();
        let receiver = report.agents.last().unwrap();
        assert_eq!(receiver.mean, 0.0);
        assert_eq!(receiver.std_error, 0.0);
    }
}
