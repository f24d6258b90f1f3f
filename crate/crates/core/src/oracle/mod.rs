//! Brute-force grid oracle.
//!
//! Every binary-support outcome on a `1/G` lattice is enumerated. Working back
//! from the last sender, each sender keeps the outcomes that no reachable
//! garbling improves on for them. Player 1 then picks the best surviving outcome.
//! The computation is exact over rationals when the prior and every payoff
//! coefficient are modest rationals, and uses floats with tolerance `1e-9`
//! otherwise.

mod engine;
mod grid;
mod montecarlo;
pub mod scalar;

use serde::Serialize;

use crate::agents::{Action, AgentSpec, HierarchySpec};
use crate::binary_solver::EquilibriumReport;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::experiment::{compose_chain, outcome_of_experiment, Experiment};
use crate::general_solver::{Binding, ConditionTrace, GeneralEquilibriumReport};
use crate::outcome::{BinaryOutcome, BinaryPrior, Prior, UniformPrior};
use engine::{exact_engine, float_engine, ChainData, Engine, Line};

pub use grid::{build_grid, OutcomeGrid};
pub use montecarlo::{monte_carlo, monte_carlo_general, AgentEstimate, MonteCarloReport, BATCH};

enum AnyEngine {
    Exact(Engine<i128>),
    Float(Engine<f64>),
}

macro_rules! with_engine {
    ($game:expr, $e:ident => $body:expr) => {
        match &$game.engine {
            AnyEngine::Exact($e) => $body,
            AnyEngine::Float($e) => $body,
        }
    };
}

/// One level of the chain: the outcomes player `player` passes on unchanged.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaLevel {
    pub player: usize,
    pub members: Vec<bool>,
    /// Best value the player can reach by garbling each pair, subject to the next level.
    pub values: Vec<f64>,
}

/// Nested incentive-compatible sets over the pairs of `grid`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaChain {
    pub grid: OutcomeGrid,
    pub exact: bool,
    pub gamma0: Vec<bool>,
    /// Players `n` down to 2.
    pub levels: Vec<GammaLevel>,
    /// Outcomes none of players 2..n would garble, ignoring downstream reactions.
    pub gamma_tilde: Vec<bool>,
}

impl GammaChain {
    /// Set kept by `player`; `n + 1` (or any player without a level) gives the feasible set.
    pub fn gamma(&self, player: usize) -> &[bool] {
        self.levels.iter().find(|l| l.player == player).map_or(&self.gamma0, |l| &l.members)
    }

    /// Set entering player 1's choice.
    pub fn top(&self) -> &[bool] {
        self.levels.last().map_or(&self.gamma0, |l| &l.members)
    }

    /// `(q0, q1)` of the informative pairs in `set`.
    pub fn informative(&self, set: &[bool]) -> Vec<(f64, f64)> {
        (0..self.grid.pair_count())
            .filter(|&i| set[i] && self.grid.is_informative(i))
            .map(|i| {
                let (l, u) = self.grid.pair(i);
                (self.grid.coord(l), self.grid.coord(u))
            })
            .collect()
    }
}

/// Where an outcome sits on the line `m1 = m0 + 0.5` among informative incentive-compatible pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LinePosition {
    pub on_line: bool,
    pub at_lower: bool,
    pub at_upper: bool,
}

impl LinePosition {
    pub fn interior(&self) -> bool {
        self.on_line && !self.at_lower && !self.at_upper
    }
}

/// A hierarchy laid out on a grid, with its incentive-compatible sets computed.
pub struct GridGame {
    grid: OutcomeGrid,
    n: usize,
    engine: AnyEngine,
    data: ChainData,
}

fn table_line(a: &AgentSpec) -> Line {
    let t = a.utility.table();
    Line { k: [t.u00, t.u01], s: [t.u10 - t.u00, t.u11 - t.u01] }
}

fn mean_line(a: &AgentSpec) -> Result<Line> {
    let l = a
        .utility
        .linear()
        .ok_or_else(|| Error::Unsupported(format!("agent {} needs a linear payoff under a uniform prior", a.label)))?;
    Ok(Line { k: [0.0, l.beta], s: [0.0, l.alpha] })
}

impl GridGame {
    fn build(grid: &OutcomeGrid, n: usize, lines: Vec<Line>, feasible: Vec<bool>, exec: Execution) -> Self {
        let engine = match exact_engine(grid, &lines, feasible.clone(), exec) {
            Some(e) => AnyEngine::Exact(e),
            None => AnyEngine::Float(float_engine(grid, &lines, feasible, exec)),
        };
        let data = match &engine {
            AnyEngine::Exact(e) => e.chain(n),
            AnyEngine::Float(e) => e.chain(n),
        };
        Self { grid: grid.clone(), n, engine, data }
    }

    /// Binary-state game; the grid must be anchored at the prior.
    pub fn binary(h: &HierarchySpec, grid: &OutcomeGrid, exec: Execution) -> Result<Self> {
        let p = match h.prior {
            Prior::Binary { p } => p,
            Prior::Uniform => return Err(Error::Unsupported("binary grid game needs a binary prior".into())),
        };
        if (p - grid.anchor()).abs() > 1e-12 {
            return Err(Error::PriorMismatch(p, grid.anchor()));
        }
        let lines = h.senders.iter().chain(std::iter::once(&h.receiver)).map(table_line).collect();
        Ok(Self::build(grid, h.n(), lines, vec![true; grid.pair_count()], exec))
    }

    /// Uniform-prior game in posterior means; feasible pairs have `m1 - m0 <= 0.5`.
    pub fn general(h: &HierarchySpec, grid: &OutcomeGrid, exec: Execution) -> Result<Self> {
        if !h.prior.is_uniform() {
            return Err(Error::Unsupported("general grid game needs the uniform prior".into()));
        }
        if (grid.anchor() - UniformPrior::MEAN).abs() > 1e-12 {
            return Err(Error::PriorMismatch(UniformPrior::MEAN, grid.anchor()));
        }
        let lines = h.senders.iter().chain(std::iter::once(&h.receiver)).map(mean_line).collect::<Result<_>>()?;
        let feasible = (0..grid.pair_count())
            .map(|i| {
                let (l, u) = grid.pair(i);
                grid.coord(u) - grid.coord(l) <= 0.5 + 1e-9
            })
            .collect();
        Ok(Self::build(grid, h.n(), lines, feasible, exec))
    }

    pub fn grid(&self) -> &OutcomeGrid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.engine, AnyEngine::Exact(_))
    }

    /// Receiver's action at coordinate `k`.
    pub fn action(&self, k: usize) -> Action {
        with_engine!(self, e => e.act[k])
    }

    /// Utility of agent `agent` (0-based senders, then the receiver at `n`) at pair `idx`.
    pub fn value(&self, agent: usize, idx: usize) -> f64 {
        with_engine!(self, e => e.value(agent, idx))
    }

    pub fn values(&self, idx: usize) -> Vec<f64> {
        (0..=self.n).map(|a| self.value(a, idx)).collect()
    }

    pub fn chain(&self) -> GammaChain {
        let (gamma0, levels) = with_engine!(self, e => (
            e.feasible.clone(),
            self.data
                .levels
                .iter()
                .map(|lv| GammaLevel { player: lv.player, members: lv.members.clone(), values: e.level_values(lv) })
                .collect::<Vec<_>>(),
        ));
        GammaChain { grid: self.grid.clone(), exact: self.is_exact(), gamma0, levels, gamma_tilde: self.data.tilde.clone() }
    }

    /// Pair indices of the equilibrium outcomes, canonicalized and filtered for informativeness.
    pub fn spe_indices(&self) -> Vec<usize> {
        with_engine!(self, e => e.spe(&self.data))
    }

    pub fn spe(&self) -> Vec<BinaryOutcome> {
        self.spe_indices().into_iter().map(|i| self.grid.outcome(i)).collect()
    }

    /// Player 1's equilibrium utility.
    pub fn player1_value(&self) -> f64 {
        self.spe_indices().first().map_or(f64::NAN, |&i| self.value(0, i))
    }

    pub fn deviation_free(&self, idx: usize) -> bool {
        with_engine!(self, e => e.deviation_free(&self.data, self.n, idx))
    }

    pub fn pareto_dominators(&self, idx: usize) -> Vec<BinaryOutcome> {
        with_engine!(self, e => e.dominators(idx)).into_iter().map(|i| self.grid.outcome(i)).collect()
    }

    /// Position of `idx` among the informative top-set pairs with spread exactly 0.5.
    pub fn line_position(&self, idx: usize) -> LinePosition {
        let spread = |i: usize| {
            let (l, u) = self.grid.pair(i);
            self.grid.coord(u) - self.grid.coord(l)
        };
        let on = |i: usize| (spread(i) - 0.5).abs() <= 1e-9;
        let informative = |i: usize| {
            let (l, u) = self.grid.pair(i);
            self.grid.is_informative(i) && self.action(l) != self.action(u)
        };
        let top = with_engine!(self, e => e.top_set(&self.data).to_vec());
        let lows: Vec<usize> =
            (0..self.grid.pair_count()).filter(|&i| top[i] && on(i) && informative(i)).map(|i| self.grid.pair(i).0).collect();
        let l = self.grid.pair(idx).0;
        let on_line = on(idx) && self.grid.is_informative(idx);
        LinePosition {
            on_line,
            at_lower: on_line && lows.iter().min() == Some(&l),
            at_upper: on_line && lows.iter().max() == Some(&l),
        }
    }
}

/// Incentive-compatible sets of a binary-state hierarchy on `grid`.
pub fn gamma_chain(h: &HierarchySpec, grid: &OutcomeGrid) -> Result<GammaChain> {
    Ok(GridGame::binary(h, grid, Execution::default())?.chain())
}

/// Equilibrium outcomes of a binary-state hierarchy on `grid`.
pub fn solve_spe_grid(h: &HierarchySpec, grid: &OutcomeGrid) -> Result<Vec<BinaryOutcome>> {
    let out = GridGame::binary(h, grid, Execution::default())?.spe();
    if out.is_empty() {
        return Err(Error::EmptyGamma);
    }
    Ok(out)
}

/// Equilibrium outcomes of a uniform-prior hierarchy and where each sits on the spread-0.5 line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralGridSolution {
    pub outcomes: Vec<BinaryOutcome>,
    pub positions: Vec<LinePosition>,
    pub player1_value: f64,
}

pub fn solve_general_grid(h: &HierarchySpec, g: u32) -> Result<GeneralGridSolution> {
    let grid = build_grid(UniformPrior, g)?;
    let game = GridGame::general(h, &grid, Execution::default())?;
    let idx = game.spe_indices();
    if idx.is_empty() {
        return Err(Error::EmptyGamma);
    }
    Ok(GeneralGridSolution {
        outcomes: idx.iter().map(|&i| grid.outcome(i)).collect(),
        positions: idx.iter().map(|&i| game.line_position(i)).collect(),
        player1_value: game.player1_value(),
    })
}

/// Whether a closed-form report's trace agrees with where the grid optimum sits.
/// Bindings are stated in the canonical orientation, so a state relabeling swaps the ends of the line.
pub fn trace_consistent(eq: &GeneralEquilibriumReport, outcome: &BinaryOutcome, position: &LinePosition) -> bool {
    let flipped = eq.pivotal.relabeling.states;
    let (upper, lower) = if flipped {
        (position.at_lower, position.at_upper)
    } else {
        (position.at_upper, position.at_lower)
    };
    match &eq.trace {
        t if t.is_no_info() => outcome.is_degenerate(),
        ConditionTrace::CaseA | ConditionTrace::CaseB => upper,
        ConditionTrace::CaseC { binding: Binding::Upper } => upper,
        ConditionTrace::CaseC { binding: Binding::Lower } => lower,
        ConditionTrace::CaseC { binding: Binding::Interior } => position.interior(),
        _ => false,
    }
}

fn round_trip(anchor: f64, support: &BinaryOutcome, n: usize) -> Result<bool> {
    let mut chain = vec![Experiment::from_outcome(support)];
    chain.extend(std::iter::repeat_n(Experiment::identity(2), n.saturating_sub(1)));
    let composed = compose_chain(&chain)?;
    let out = outcome_of_experiment(BinaryPrior::new(anchor)?, &composed)?;
    Ok(if support.is_degenerate() { out.is_degenerate() } else { out.approx_eq(support, 1e-12) })
}

/// Whether `support` is passed through unchanged by senders 2..n on `grid`.
pub fn verify_outcome(h: &HierarchySpec, support: &BinaryOutcome, grid: &OutcomeGrid) -> Result<bool> {
    let game = match h.prior {
        Prior::Binary { .. } => GridGame::binary(h, grid, Execution::default())?,
        Prior::Uniform => GridGame::general(h, grid, Execution::default())?,
    };
    let idx = grid.snap(support)?;
    Ok(round_trip(grid.anchor(), support, h.n())? && game.deviation_free(idx))
}

/// Composing the equilibrium experiment with identities reproduces the outcome,
/// and no sender after the first gains by garbling it.
pub fn verify_simple_equilibrium(h: &HierarchySpec, eq: &EquilibriumReport, grid: &OutcomeGrid) -> Result<bool> {
    verify_outcome(h, &eq.support, grid)
}

pub fn verify_general_equilibrium(h: &HierarchySpec, eq: &GeneralEquilibriumReport, g: u32) -> Result<bool> {
    verify_outcome(h, &eq.support, &build_grid(UniformPrior, g)?)
}

/// Grid outcomes every agent, the receiver included, weakly prefers to `out`, someone strictly.
pub fn pareto_dominators(h: &HierarchySpec, grid: &OutcomeGrid, out: &BinaryOutcome) -> Result<Vec<BinaryOutcome>> {
    let game = match h.prior {
        Prior::Binary { .. } => GridGame::binary(h, grid, Execution::default())?,
        Prior::Uniform => GridGame::general(h, grid, Execution::default())?,
    };
    Ok(game.pareto_dominators(grid.snap(out)?))
}

/// Solves many binary hierarchies on one grid.
pub fn solve_spe_batch(hs: &[HierarchySpec], grid: &OutcomeGrid, exec: Execution) -> Vec<Result<Vec<BinaryOutcome>>> {
    exec.map(hs, |h| GridGame::binary(h, grid, Execution::Sequential).map(|g| g.spe()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{LinearUtility, TableUtility};
    use crate::binary_solver::solve_binary;
    use crate::general_solver::solve_general_uniform;

    fn conf(mu: f64) -> AgentSpec {
        AgentSpec::table(format!("conf{mu}"), TableUtility::quadratic_loss(2.0 * mu - 1.0))
    }

    fn contr(mu: f64) -> AgentSpec {
        AgentSpec::table(format!("contr{mu}"), TableUtility::mismatch_reward(2.0 * mu - 1.0))
    }

    fn zero_extremist() -> AgentSpec {
        AgentSpec::table("e0", TableUtility::new(1.0, 0.5, 0.0, 0.0))
    }

    fn lin(omega: f64) -> AgentSpec {
        AgentSpec::linear(format!("w{omega}"), LinearUtility::with_threshold(omega))
    }

    fn binary(senders: Vec<AgentSpec>) -> HierarchySpec {
        HierarchySpec::new(Prior::binary(0.6).unwrap(), senders, conf(0.4)).unwrap()
    }

    fn grid(g: u32) -> OutcomeGrid {
        build_grid(Prior::binary(0.6).unwrap(), g).unwrap()
    }

    fn only(outs: &[BinaryOutcome], q0: f64, q1: f64) -> bool {
        outs.len() == 1 && (outs[0].q0 - q0).abs() < 1e-12 && (outs[0].q1 - q1).abs() < 1e-12
    }

    #[test]
    fn nested_sets_with_a_zero_extremist() {
        let h = binary(vec![conf(0.3), zero_extremist(), conf(0.2)]);
        let chain = gamma_chain(&h, &grid(20)).unwrap();
        assert!(chain.exact);
        let g3 = chain.informative(chain.gamma(3));
        assert!(g3.iter().all(|&(q0, _)| q0 <= 0.2 + 1e-12 || q0 >= 0.4 - 1e-12));
        let g2 = chain.informative(chain.gamma(2));
        assert!(g2.iter().all(|&(q0, _)| (q0 - 0.2).abs() < 1e-12 || q0 >= 0.4 - 1e-12));
        assert!(g2.iter().any(|&(q0, _)| (q0 - 0.2).abs() < 1e-12));
        let tilde = chain.informative(&chain.gamma_tilde);
        assert!(tilde.iter().all(|&(q0, _)| q0 >= 0.4 - 1e-12));
        assert!(!tilde.is_empty());
    }

    #[test]
    fn binary_cases_on_grid() {
        let g = grid(20);
        assert!(only(&solve_spe_grid(&binary(vec![conf(0.25), conf(0.3), conf(0.7)]), &g).unwrap(), 0.0, 1.0));
        assert!(only(&solve_spe_grid(&binary(vec![contr(0.1), conf(0.25), conf(0.3)]), &g).unwrap(), 0.25, 1.0));
        assert!(solve_spe_grid(&binary(vec![conf(0.25), contr(0.1), conf(0.3)]), &g).unwrap()[0].is_degenerate());
    }

    #[test]
    fn verification_checks_senders_after_the_first() {
        let g = grid(20);
        let h = binary(vec![contr(0.1), conf(0.25), conf(0.3)]);
        let eq = solve_binary(&h).unwrap();
        assert!(verify_simple_equilibrium(&h, &eq, &g).unwrap());
        let full = BinaryOutcome::full_info(0.6);
        assert!(verify_outcome(&h, &full, &g).unwrap());
        let pushed = binary(vec![conf(0.35), contr(0.1), conf(0.25)]);
        let eq = solve_binary(&pushed).unwrap();
        assert!((eq.support.q0 - 0.25).abs() < 1e-12);
        assert!(verify_simple_equilibrium(&pushed, &eq, &g).unwrap());
        assert!(!verify_outcome(&pushed, &full, &g).unwrap());
        let all_conf = binary(vec![conf(0.25), conf(0.3), conf(0.7)]);
        assert!(verify_simple_equilibrium(&all_conf, &solve_binary(&all_conf).unwrap(), &g).unwrap());
    }

    #[test]
    fn blocked_outcome_has_pareto_improvements() {
        let h = binary(vec![conf(0.25), contr(0.1), conf(0.3)]);
        let doms = pareto_dominators(&h, &grid(20), &BinaryOutcome::no_info(0.6)).unwrap();
        assert!(!doms.is_empty());
        assert!(doms.iter().all(|d| d.q0 >= 0.1 - 1e-12 && d.q0 <= 0.25 + 1e-12));
    }

    #[test]
    fn general_grid_matches_closed_form() {
        let h = HierarchySpec::new(Prior::Uniform, vec![lin(0.32), lin(0.2), lin(0.58)], lin(0.3)).unwrap();
        let sol = solve_general_grid(&h, 100).unwrap();
        assert!(only(&sol.outcomes, 0.16, 0.66));
        let eq = solve_general_uniform(&h).unwrap();
        assert!(trace_consistent(&eq, &sol.outcomes[0], &sol.positions[0]));
        assert!(verify_general_equilibrium(&h, &eq, 100).unwrap());
    }

    #[test]
    fn grid_requires_matching_prior() {
        let h = binary(vec![conf(0.25)]);
        let g = build_grid(Prior::binary(0.5).unwrap(), 20).unwrap();
        assert!(matches!(gamma_chain(&h, &g), Err(Error::PriorMismatch(..))));
    }

    #[test]
    fn float_fallback_agrees() {
        let odd = AgentSpec::table("odd", TableUtility::quadratic_loss(2.0 * std::f64::consts::FRAC_1_PI - 1.0));
        let h = binary(vec![contr(0.1), odd, conf(0.3)]);
        let game = GridGame::binary(&h, &grid(20), Execution::Sequential).unwrap();
        assert!(!game.is_exact());
        assert!(game.spe().iter().all(|o| o.q1 == 1.0));
    }
}
