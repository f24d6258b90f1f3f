//! Closed-form equilibria when the state is uniform on [0, 1] and every
//! agent's gain from action 1 is linear in the state.
//!
//! Outcomes are pairs of posterior means `{m0, m1}` around 0.5. Player 1
//! chooses the split; the rest of the chain then plays a binary-state
//! subgame whose two "states" are `m0` and `m1`.

use serde::{Deserialize, Serialize};

use crate::agents::pivotal::{canonical_classes, general_pivots};
use crate::agents::{Action, AgentSpec, HierarchySpec, Kind, LinearUtility, PivotalReport, Relabeling};
use crate::binary_solver::{solve_binary, BinaryCase, EquilibriumKind, Preference};
use crate::error::{Error, Result};
use crate::outcome::{outcome_at, BinaryOutcome, Prior, UniformPrior, EPS};

const M: f64 = UniformPrior::MEAN;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneralKind {
    NoInfo,
    Supported,
}

/// Which bound fixes player 1's lower mean when every agent is a conformist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binding {
    /// The most biased conformist's threshold.
    Upper,
    /// The spread needed to keep the strongest 0-leaning conformist on board.
    Lower,
    /// Player 1's unconstrained optimum, half her threshold.
    Interior,
}

/// The configuration that decided the equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum ConditionTrace {
    /// A 1-extremist or a contrarian above the receiver's threshold.
    Condition1a,
    /// A contrarian between the pivotal conformist and the receiver.
    Condition1b,
    /// The pivotal conformist precedes the last opposing agent.
    Condition1c,
    /// The 0-leaning conformists ahead of the pivot need a spread above 0.5.
    Condition2,
    /// Non-conformists present.
    CaseA,
    /// All conformists, spread bound not reachable.
    CaseB,
    CaseC { binding: Binding },
}

impl ConditionTrace {
    pub fn is_no_info(self) -> bool {
        matches!(self, Self::Condition1a | Self::Condition1b | Self::Condition1c | Self::Condition2)
    }

    /// The no-information causes that leave the chain inefficient.
    pub fn is_inefficient(self) -> bool {
        matches!(self, Self::Condition1c | Self::Condition2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralEquilibriumReport {
    pub kind: GeneralKind,
    /// Posterior means; `{0.5}` when nothing is revealed.
    pub support: BinaryOutcome,
    /// Split point of the state interval, `2 * m0` for a supported outcome.
    pub cut: Option<f64>,
    pub trace: ConditionTrace,
    pub pivotal: PivotalReport,
    pub efficient: bool,
    /// Senders 1..n, then the receiver, with `u(w, 0) = 0`.
    pub values: Vec<f64>,
    pub tie_action: Action,
}

impl GeneralEquilibriumReport {
    pub fn receiver_value(&self) -> f64 {
        *self.values.last().expect("values include the receiver")
    }
}

/// Receiver behaviour at a posterior mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanRule {
    pub receiver: LinearUtility,
    pub tie: Action,
}

impl MeanRule {
    pub fn for_hierarchy(h: &HierarchySpec) -> Result<Self> {
        let receiver = linear_of(&h.receiver)?;
        let omega = receiver.threshold();
        let tie = match h.senders.last() {
            Some(last) if (0.0..=1.0).contains(&omega) => {
                Action::from_bool(linear_of(last)?.gain_of_one(omega) >= 0.0)
            }
            _ => Action::One,
        };
        Ok(Self { receiver, tie })
    }

    pub fn action(&self, m: f64) -> Action {
        let g = self.receiver.gain_of_one(m);
        let scale = 1.0 + self.receiver.alpha.abs() + self.receiver.beta.abs();
        if g.abs() <= 1e-12 * scale {
            self.tie
        } else {
            Action::from_bool(g > 0.0)
        }
    }
}

fn linear_of(a: &AgentSpec) -> Result<LinearUtility> {
    a.utility
        .linear()
        .ok_or_else(|| Error::Unsupported(format!("agent `{}` needs a linear utility", a.label)))
}

/// Value of `agent` at `out` (means), taking `u(w, 0) = 0`.
pub fn general_value(agent: &LinearUtility, out: &BinaryOutcome, rule: &MeanRule) -> f64 {
    let at = |m: f64| if rule.action(m).is_one() { agent.gain_of_one(m) } else { 0.0 };
    if out.is_degenerate() {
        return at(out.p);
    }
    out.w0 * at(out.q0) + out.w1 * at(out.q1)
}

/// Values of every sender and the receiver at `out`.
pub fn general_values(h: &HierarchySpec, out: &BinaryOutcome) -> Result<Vec<f64>> {
    let rule = MeanRule::for_hierarchy(h)?;
    h.senders
        .iter()
        .chain(std::iter::once(&h.receiver))
        .map(|a| Ok(general_value(&linear_of(a)?, out, &rule)))
        .collect()
}

fn binary_game_over(h: &HierarchySpec, skip: usize) -> Result<HierarchySpec> {
    if !h.prior.is_uniform() {
        return Err(Error::Unsupported("expected a uniform prior".into()));
    }
    let convert = |a: &AgentSpec| Ok(AgentSpec::linear(a.label.clone(), linear_of(a)?));
    let senders = h.senders.iter().skip(skip).map(convert).collect::<Result<Vec<_>>>()?;
    let prior = Prior::binary(M)?;
    Ok(HierarchySpec::new_unchecked(prior, senders, convert(&h.receiver)?))
}

/// Binary-state game with prior 0.5 over senders 2..n, thresholds unchanged.
pub fn reduced_binary_game(h: &HierarchySpec) -> Result<HierarchySpec> {
    binary_game_over(h, 1)
}

/// Binary-state game with prior 0.5 over senders 1..n, thresholds unchanged.
pub fn corresponding_binary_game(h: &HierarchySpec) -> Result<HierarchySpec> {
    binary_game_over(h, 0)
}

/// True when the corresponding binary game reveals nothing, which forces the
/// general game to reveal nothing as well.
pub fn no_info_reduction(h: &HierarchySpec) -> Result<bool> {
    Ok(solve_binary(&corresponding_binary_game(h)?)?.kind == EquilibriumKind::NoInfo)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum SubgameOutcome {
    Supported { support: BinaryOutcome },
    NoInfo,
}

/// Outcome passed to the receiver once player 1 has chosen means `{m0, m1}`.
pub fn solve_subgame_given_support(h: &HierarchySpec, m0: f64, m1: f64) -> Result<SubgameOutcome> {
    if !(0.0 <= m0 && m0 < m1 && m1 <= 1.0 && m0 <= M && M <= m1) {
        return Err(Error::OrderViolation { q0: m0, p: M, q1: m1 });
    }
    if m1 - m0 > 0.5 + EPS {
        return Err(Error::InfeasibleSpread(m1 - m0));
    }
    let (_, r, senders, receiver) = canonical_classes(h)?;
    let (c0, c1) = if r.states { (1.0 - m1, 1.0 - m0) } else { (m0, m1) };
    Ok(match subgame_canonical(&senders, &receiver, r, c0, c1)? {
        Some((lo, hi)) => SubgameOutcome::Supported { support: r.map_outcome(&outcome_at(lo, hi, M)?) },
        None => SubgameOutcome::NoInfo,
    })
}

fn subgame_canonical(
    senders: &[crate::agents::AgentClass],
    receiver: &crate::agents::AgentClass,
    r: Relabeling,
    m0: f64,
    m1: f64,
) -> Result<Option<(f64, f64)>> {
    if m1 - m0 <= EPS || M - m0 <= EPS || m1 - M <= EPS {
        return Ok(None);
    }
    let (piv, part) = general_pivots(senders, receiver, r)?;
    let reduced_blocked = !part.c.is_empty()
        || !part.e1.is_empty()
        || part.d.iter().any(|&i| senders[i - 1].mu() > piv.a_star_threshold)
        || piv.e_star.is_some_and(|e| piv.a_star.position(senders.len()) < e);
    if reduced_blocked {
        return Ok(None);
    }
    let omega_a = piv.a_star_threshold;
    if m0 > omega_a + EPS {
        return Ok(None);
    }
    let b_star = piv.general.as_ref().map_or(M, |g| g.b_star_threshold);
    let rest = &senders[1..];
    if rest.iter().all(|c| c.kind == Kind::Conformist) && m1 >= b_star - EPS {
        return Ok(Some((m0, m1)));
    }
    let a_pos = piv.a_star.position(senders.len());
    let new_zero_ahead = rest
        .iter()
        .enumerate()
        .any(|(k, c)| c.kind == Kind::Conformist && c.mu() > m1 + EPS && k + 2 > a_pos);
    if new_zero_ahead {
        return Ok(None);
    }
    Ok(Some((omega_a.max(m0), m1)))
}

/// Player 1's value from means `{m0, m0 + 0.5}` when the split is passed on intact.
pub fn player1_value(m0: f64, u1: &LinearUtility) -> f64 {
    2.0 * (M - m0) * (u1.alpha * m0 + 0.5 * u1.alpha + u1.beta)
}

/// Player 1's comparison of two mean outcomes, with the receiver taking
/// action 1 at and above `omega_r`.
pub fn player1_prefers(u1: &LinearUtility, out_a: &BinaryOutcome, out_b: &BinaryOutcome, omega_r: f64) -> Preference {
    let value = |o: &BinaryOutcome| {
        if o.is_degenerate() || o.q0 >= omega_r {
            u1.gain_of_one(o.p)
        } else {
            o.w1 * u1.gain_of_one(o.q1)
        }
    };
    let (a, b) = (value(out_a), value(out_b));
    if (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs())) {
        Preference::Indifferent
    } else if a > b {
        Preference::First
    } else {
        Preference::Second
    }
}

/// Subgame-perfect outcome of the uniform-prior game.
pub fn solve_general_uniform(h: &HierarchySpec) -> Result<GeneralEquilibriumReport> {
    if !h.prior.is_uniform() {
        return Err(Error::Unsupported("the general solver needs a uniform prior".into()));
    }
    for a in h.senders.iter().chain(std::iter::once(&h.receiver)) {
        linear_of(a)?;
    }
    if h.receiver.classify(h.prior)?.kind.is_extremist() {
        return Err(Error::NotCovered("the receiver is an absolute extremist".into()));
    }
    let (c, r, senders, receiver) = canonical_classes(h)?;
    let (piv, _) = general_pivots(&senders, &receiver, r)?;
    let g = piv.general.clone().expect("general pivots present");
    let corresponding = solve_binary(&corresponding_binary_game(&c)?)?;

    let (trace, m0) = if corresponding.kind == EquilibriumKind::NoInfo {
        let t = match corresponding.case {
            BinaryCase::Blocked => ConditionTrace::Condition1a,
            BinaryCase::OpposedContrarian => ConditionTrace::Condition1b,
            _ => ConditionTrace::Condition1c,
        };
        (t, None)
    } else if g.b_star_p_threshold - g.p_threshold > 0.5 + EPS {
        (ConditionTrace::Condition2, None)
    } else if senders.iter().any(|s| s.kind != Kind::Conformist) {
        (ConditionTrace::CaseA, Some(g.p_threshold))
    } else if g.b_star_threshold - g.p_threshold > 0.5 + EPS {
        (ConditionTrace::CaseB, Some(g.p_threshold))
    } else {
        let lower = g.b_star_threshold - 0.5;
        let interior = 0.5 * senders[0].mu();
        let m0 = g.p_threshold.min(lower.max(interior));
        let binding = if (m0 - g.p_threshold).abs() <= EPS {
            Binding::Upper
        } else if (m0 - lower).abs() <= EPS {
            Binding::Lower
        } else {
            Binding::Interior
        };
        (ConditionTrace::CaseC { binding }, Some(m0))
    };

    let canonical = match m0 {
        Some(m0) => outcome_at(m0, m0 + 0.5, M)?,
        None => BinaryOutcome::no_info(M),
    };
    let support = r.map_outcome(&canonical);
    let rule = MeanRule::for_hierarchy(h)?;
    Ok(GeneralEquilibriumReport {
        kind: if support.is_degenerate() { GeneralKind::NoInfo } else { GeneralKind::Supported },
        cut: (!support.is_degenerate()).then(|| 2.0 * support.q0),
        trace,
        efficient: !trace.is_inefficient(),
        values: general_values(h, &support)?,
        support,
        pivotal: piv,
        tie_action: rule.tie,
    })
}
