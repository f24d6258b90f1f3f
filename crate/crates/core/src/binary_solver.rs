//! Closed-form equilibria of binary-state chains and the expected-utility calculus.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::agents::pivotal::{binary_pivots, canonical_classes};
use crate::agents::{Action, HierarchySpec, PivotalReport, TableUtility};
use crate::error::{Error, Result};
use crate::outcome::{outcome_at, BinaryOutcome, Prior};

/// How the receiver acts at a belief: his own best reply, with exact
/// indifference broken by a fixed action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceiverRule {
    pub receiver: TableUtility,
    pub tie: Action,
}

impl ReceiverRule {
    pub fn new(receiver: TableUtility, tie: Action) -> Self {
        Self { receiver, tie }
    }

    /// Quadratic-loss conformist with threshold `mu_r`.
    pub fn conformist(mu_r: f64, tie: Action) -> Self {
        Self::new(TableUtility::quadratic_loss(2.0 * mu_r - 1.0), tie)
    }

    /// The receiver of `h`, breaking ties with the favorite action of sender `n`.
    pub fn for_hierarchy(h: &HierarchySpec) -> Self {
        let receiver = h.receiver.utility.table();
        let tie = match (crate::agents::indifference_belief(&receiver), h.senders.last()) {
            (Ok(mu), Some(last)) if (0.0..=1.0).contains(&mu) => {
                Action::from_bool(last.utility.table().gain_of_one(mu) >= 0.0)
            }
            _ => Action::One,
        };
        Self { receiver, tie }
    }

    pub fn action(&self, q: f64) -> Action {
        let g = self.receiver.gain_of_one(q);
        let scale = 1.0
            + [self.receiver.u00, self.receiver.u10, self.receiver.u01, self.receiver.u11]
                .iter()
                .fold(0.0f64, |m, x| m.max(x.abs()));
        if g.abs() <= 1e-12 * scale {
            self.tie
        } else {
            Action::from_bool(g > 0.0)
        }
    }
}

/// Expected payoff of `agent` when the receiver sees a posterior drawn from `out`.
pub fn expected_value(agent: &TableUtility, out: &BinaryOutcome, rule: &ReceiverRule) -> f64 {
    let at = |q: f64| agent.expected(q, rule.action(q));
    if out.is_degenerate() {
        return at(out.p);
    }
    out.w0 * at(out.q0) + out.w1 * at(out.q1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preference {
    First,
    Second,
    Indifferent,
}

/// Compares two outcomes for `agent`; near-equal values are reported as indifference.
pub fn prefers(agent: &TableUtility, out_a: &BinaryOutcome, out_b: &BinaryOutcome, rule: &ReceiverRule) -> Result<Preference> {
    if (out_a.p - out_b.p).abs() > 1e-12 {
        return Err(Error::PriorMismatch(out_a.p, out_b.p));
    }
    let (a, b) = (expected_value(agent, out_a, rule), expected_value(agent, out_b, rule));
    let tol = 1e-12 * (1.0 + a.abs().max(b.abs()));
    Ok(match a.partial_cmp(&b) {
        _ if (a - b).abs() <= tol => Preference::Indifferent,
        Some(Ordering::Greater) => Preference::First,
        _ => Preference::Second,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    NoInfo,
    FullInfo,
    Partial,
}

/// Which configuration decided the equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinaryCase {
    /// The receiver acts the same way at every belief.
    ExtremistReceiver,
    /// A 1-extremist or a contrarian above the receiver's threshold blocks everything.
    Blocked,
    /// A contrarian sits between the pivotal conformist and the receiver's threshold.
    OpposedContrarian,
    AllConformist,
    /// The pivotal conformist precedes the last opposing agent.
    PivotBehind,
    /// The pivotal conformist follows every opposing agent.
    PivotAhead,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Lower,
    Upper,
}

/// Outcomes whose `side` posterior lies in `[lo, hi]` dominate the equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub side: Side,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Efficiency {
    pub efficient: bool,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub kind: EquilibriumKind,
    pub case: BinaryCase,
    pub support: BinaryOutcome,
    /// `None` when the receiver is an extremist.
    pub pivotal: Option<PivotalReport>,
    pub efficiency: Efficiency,
    /// Senders 1..n, then the receiver.
    pub values: Vec<f64>,
    pub tie_action: Action,
}

impl EquilibriumReport {
    pub fn receiver_value(&self) -> f64 {
        *self.values.last().expect("values include the receiver")
    }
}

fn kind_of(out: &BinaryOutcome) -> EquilibriumKind {
    if out.is_degenerate() {
        EquilibriumKind::NoInfo
    } else if out.is_full_info() {
        EquilibriumKind::FullInfo
    } else {
        EquilibriumKind::Partial
    }
}

/// Values of every sender and the receiver at `out`.
pub fn agent_values(h: &HierarchySpec, out: &BinaryOutcome, rule: &ReceiverRule) -> Vec<f64> {
    h.senders
        .iter()
        .chain(std::iter::once(&h.receiver))
        .map(|a| expected_value(&a.utility.table(), out, rule))
        .collect()
}

/// Subgame-perfect outcome of a binary-state chain.
pub fn solve_binary(h: &HierarchySpec) -> Result<EquilibriumReport> {
    let Prior::Binary { p } = h.prior else {
        return Err(Error::Unsupported("the binary solver needs a binary prior".into()));
    };
    let rule = ReceiverRule::for_hierarchy(h);
    if h.receiver.classify(h.prior)?.kind.is_extremist() {
        let support = BinaryOutcome::full_info(p);
        return Ok(EquilibriumReport {
            kind: EquilibriumKind::FullInfo,
            case: BinaryCase::ExtremistReceiver,
            values: agent_values(h, &support, &rule),
            support,
            pivotal: None,
            efficiency: Efficiency { efficient: true, witness: None },
            tie_action: rule.tie,
        });
    }
    let (c, r, senders, receiver) = canonical_classes(h)?;
    let indexed: Vec<_> = senders.iter().enumerate().map(|(k, cl)| (k + 1, *cl)).collect();
    let (piv, part) = binary_pivots(&indexed, receiver.mu(), c.anchor(), r);
    let opposed = part.d.iter().any(|&i| senders[i - 1].mu() > piv.a_star_threshold);
    let case = if !part.c.is_empty() || !part.e1.is_empty() {
        BinaryCase::Blocked
    } else if opposed {
        BinaryCase::OpposedContrarian
    } else if part.all_conformist() {
        BinaryCase::AllConformist
    } else if piv.e_star.is_some_and(|e| piv.a_star.position(h.n()) < e) {
        BinaryCase::PivotBehind
    } else {
        BinaryCase::PivotAhead
    };
    let pc = c.anchor();
    let canonical = match case {
        BinaryCase::AllConformist => BinaryOutcome::full_info(pc),
        BinaryCase::PivotAhead => outcome_at(piv.a_star_threshold, 1.0, pc)?,
        _ => BinaryOutcome::no_info(pc),
    };
    let support = r.map_outcome(&canonical);
    let efficiency = efficiency_of(case, &piv);
    Ok(EquilibriumReport {
        kind: kind_of(&support),
        case,
        values: agent_values(h, &support, &rule),
        support,
        pivotal: Some(piv),
        efficiency,
        tie_action: rule.tie,
    })
}

fn efficiency_of(case: BinaryCase, piv: &PivotalReport) -> Efficiency {
    if case != BinaryCase::PivotBehind {
        return Efficiency { efficient: true, witness: None };
    }
    let (lo, hi) = (piv.d_star_threshold, piv.a_star_threshold);
    let witness = if piv.relabeling.states {
        Witness { side: Side::Upper, lo: 1.0 - hi, hi: 1.0 - lo }
    } else {
        Witness { side: Side::Lower, lo, hi }
    };
    Efficiency { efficient: false, witness: Some(witness) }
}

/// Efficiency verdict for a report produced by [`solve_binary`] on `h`.
pub fn classify_efficiency(h: &HierarchySpec, report: &EquilibriumReport) -> Result<Efficiency> {
    if report.pivotal.is_none() {
        return Ok(Efficiency { efficient: true, witness: None });
    }
    Ok(efficiency_of(report.case, &crate::agents::pivotal_binary(h)?))
}
