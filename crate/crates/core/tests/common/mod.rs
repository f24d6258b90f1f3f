//! Builders and checks shared by the property, regression and acceptance targets.
#![allow(dead_code)]

use persuasion_core::agents::{indifference_belief, AgentSpec, HierarchySpec, LinearUtility, TableUtility};
use persuasion_core::binary_solver::{expected_value, ReceiverRule};
use persuasion_core::experiment::{outcome_of_experiment, Experiment};
use persuasion_core::general_solver::solve_general_uniform;
use persuasion_core::oracle::{build_grid, GammaChain, GridGame};
use persuasion_core::outcome::{is_mpc, outcome_at, BinaryOutcome, BinaryPrior, Prior};
use persuasion_core::exec::Execution;

pub type Check = Result<(), String>;

pub fn conf(mu: f64) -> AgentSpec {
    AgentSpec::table(format!("conf{mu}"), TableUtility::quadratic_loss(2.0 * mu - 1.0))
}

pub fn contr(mu: f64) -> AgentSpec {
    AgentSpec::table(format!("contr{mu}"), TableUtility::mismatch_reward(2.0 * mu - 1.0))
}

pub fn zero_extremist() -> AgentSpec {
    AgentSpec::table("zero_extremist", TableUtility::new(1.0, 0.5, 0.0, 0.0))
}

pub fn lin(omega: f64) -> AgentSpec {
    AgentSpec::linear(format!("lin{omega}"), LinearUtility::with_threshold(omega))
}

pub fn binary(p: f64, senders: Vec<AgentSpec>, receiver: AgentSpec) -> HierarchySpec {
    HierarchySpec::new(Prior::binary(p).unwrap(), senders, receiver).unwrap()
}

pub fn uniform(senders: Vec<AgentSpec>, receiver: AgentSpec) -> HierarchySpec {
    HierarchySpec::new(Prior::Uniform, senders, receiver).unwrap()
}

/// Senders (contrarian 0.1, conformist 0.25, conformist 0.3), receiver conformist 0.4, prior 0.6.
pub fn pivot_ahead() -> HierarchySpec {
    binary(0.6, vec![contr(0.1), conf(0.25), conf(0.3)], conf(0.4))
}

/// Senders (conformist 0.25, contrarian 0.1, conformist 0.3): the pivot precedes the contrarian.
pub fn pivot_behind() -> HierarchySpec {
    binary(0.6, vec![conf(0.25), contr(0.1), conf(0.3)], conf(0.4))
}

pub fn all_conformist() -> HierarchySpec {
    binary(0.6, vec![conf(0.25), conf(0.3), conf(0.7)], conf(0.4))
}

/// Player 1 free, sender 2 a 0-extremist, sender 3 a conformist at 0.2; receiver 0.4, prior 0.6.
pub fn separation_instance() -> HierarchySpec {
    binary(0.6, vec![conf(0.7), zero_extremist(), conf(0.2)], conf(0.4))
}

/// Uniform prior, thresholds (0.32, 0.2, 0.58), receiver 0.3: equilibrium {0.16, 0.66}.
pub fn interior_cut() -> HierarchySpec {
    uniform(vec![lin(0.32), lin(0.2), lin(0.58)], lin(0.3))
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

pub fn same_support(a: &BinaryOutcome, b: &BinaryOutcome, tol: f64) -> bool {
    close(a.q0, b.q0, tol) && close(a.q1, b.q1, tol)
}

/// Membership vector of a set, compared pair by pair with `expected(q0)` on canonical outcomes.
pub fn set_matches(chain: &GammaChain, set: &[bool], expected: impl Fn(&BinaryOutcome) -> bool) -> Check {
    for idx in 0..chain.grid.pair_count() {
        let o = chain.grid.outcome(idx);
        if set[idx] != expected(&o) {
            return Err(format!("pair ({}, {}): member={} expected={}", o.q0, o.q1, set[idx], expected(&o)));
        }
    }
    Ok(())
}

/// Each level sits inside the next one up, `gamma_tilde` inside level 2, and `{p}` in every level.
pub fn nesting(chain: &GammaChain, n: usize) -> Check {
    let subset = |a: &[bool], b: &[bool]| a.iter().zip(b).all(|(&x, &y)| !x || y);
    for player in 2..=n {
        let outer = chain.gamma(player + 1);
        if !subset(chain.gamma(player), outer) {
            return Err(format!("Gamma_{player} is not inside the next level"));
        }
    }
    let bottom = chain.gamma(2);
    if !subset(&chain.gamma_tilde, bottom) {
        return Err("Gamma-tilde is not inside Gamma_2".into());
    }
    let d = chain.grid.degenerate_index();
    if !(chain.gamma0[d] && (2..=n).all(|i| chain.gamma(i)[d])) {
        return Err("no-information outcome missing from a level".into());
    }
    Ok(())
}

pub fn chain_of(h: &HierarchySpec, g: u32) -> GammaChain {
    let grid = build_grid(h.prior, g).unwrap();
    match h.prior {
        Prior::Binary { .. } => GridGame::binary(h, &grid, Execution::default()).unwrap().chain(),
        Prior::Uniform => GridGame::general(h, &grid, Execution::default()).unwrap().chain(),
    }
}

/// Reflexive, antisymmetric and transitive on three outcomes sharing a prior.
pub fn mpc_laws(a: &BinaryOutcome, b: &BinaryOutcome, c: &BinaryOutcome) -> Check {
    let le = |x: &BinaryOutcome, y: &BinaryOutcome| is_mpc(x, y).unwrap();
    for x in [a, b, c] {
        if !le(x, x) {
            return Err(format!("not reflexive at {x:?}"));
        }
        let p = x.p;
        if !le(&BinaryOutcome::no_info(p), x) || !le(x, &BinaryOutcome::full_info(p)) {
            return Err(format!("{x:?} is not between no and full information"));
        }
    }
    if le(a, b) && le(b, a) && !same_support(a, b, 1e-12) {
        return Err(format!("antisymmetry fails for {a:?} and {b:?}"));
    }
    if le(a, b) && le(b, c) && !le(a, c) {
        return Err(format!("transitivity fails for {a:?} <= {b:?} <= {c:?}"));
    }
    Ok(())
}

/// Garbling a binary experiment never adds information.
pub fn composition_garbles(p: f64, first: &Experiment, second: &Experiment) -> Check {
    let prior = BinaryPrior::new(p).unwrap();
    let (Ok(base), Ok(composed)) =
        (outcome_of_experiment(prior, first), outcome_of_experiment(prior, &first.compose(second).unwrap()))
    else {
        return Ok(());
    };
    if !is_mpc(&composed, &base).unwrap() {
        return Err(format!("composition {composed:?} is not a contraction of {base:?}"));
    }
    if close(composed.plausibility_gap(), 0.0, 1e-12) {
        Ok(())
    } else {
        Err(format!("composed outcome not Bayes-plausible: {composed:?}"))
    }
}

/// Positive affine transforms leave the indifference belief unchanged. With dyadic
/// entries, scale and shift every step is exact, so equality is bitwise.
pub fn affine_invariance(u: &TableUtility, scale: f64, shift: f64, bitwise: bool) -> Check {
    let (Ok(a), Ok(b)) = (indifference_belief(u), indifference_belief(&u.affine(scale, shift))) else {
        return Ok(());
    };
    let ok = if bitwise { a.to_bits() == b.to_bits() } else { close(a, b, 1e-12 * (1.0 + a.abs())) };
    if ok {
        Ok(())
    } else {
        Err(format!("{u:?} scaled by {scale} shifted by {shift}: {a} vs {b}"))
    }
}

/// Sign of the differenced expected value in `q0` (`q1`) follows the preference at `q1` (`q0`).
pub fn finite_difference_signs(agent: &TableUtility, mu_r: f64, p: f64, q0: f64, q1: f64) -> Check {
    const STEP: f64 = 1e-6;
    let rule = ReceiverRule::conformist(mu_r, persuasion_core::agents::Action::One);
    let value = |a: f64, b: f64| expected_value(agent, &outcome_at(a, b, p).unwrap(), &rule);
    let d0 = (value(q0 + STEP, q1) - value(q0 - STEP, q1)) / (2.0 * STEP);
    let d1 = (value(q0, q1 + STEP) - value(q0, q1 - STEP)) / (2.0 * STEP);
    let prefers_one_at_q1 = agent.gain_of_one(q1) > 0.0;
    let prefers_zero_at_q0 = agent.gain_of_one(q0) < 0.0;
    if (d0 < 0.0) != prefers_one_at_q1 {
        return Err(format!("dE/dq0 = {d0} at ({q0}, {q1}) for {agent:?}"));
    }
    if (d1 > 0.0) != prefers_zero_at_q0 {
        return Err(format!("dE/dq1 = {d1} at ({q0}, {q1}) for {agent:?}"));
    }
    Ok(())
}

/// All-conformist uniform-prior chain with player 1 at `omega1`, a 0-leaning conformist at
/// `omega_p + gap` ahead of the pivot at `omega_p`, receiver at `omega_r`.
pub fn boundary_chain(omega1: f64, omega_p: f64, gap: f64, omega_r: f64) -> HierarchySpec {
    uniform(vec![lin(omega1), lin(omega_p + gap), lin(omega_p)], lin(omega_r))
}

/// Supports on both sides of `omega_B - omega_P = 0.5` approach the boundary support.
pub fn boundary_continuity(omega1: f64, omega_p: f64, omega_r: f64, eps: f64) -> Check {
    let at = solve_general_uniform(&boundary_chain(omega1, omega_p, 0.5, omega_r)).map_err(|e| e.to_string())?;
    for gap in [0.5 - eps, 0.5 + eps] {
        let near = solve_general_uniform(&boundary_chain(omega1, omega_p, gap, omega_r)).map_err(|e| e.to_string())?;
        if !same_support(&near.support, &at.support, eps + 1e-12) {
            return Err(format!(
                "gap {gap}: {:?} {:?} vs boundary {:?} {:?}",
                near.trace, near.support, at.trace, at.support
            ));
        }
    }
    Ok(())
}
