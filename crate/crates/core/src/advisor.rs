//! Agents the receiver would append right before himself to extract more information.
//!
//! Work happens in the canonical orientation, where the receiver is a conformist
//! leaning toward action 1. Recommended agents are mapped back through the same
//! relabeling, so they come out with the receiver's own type in the original labels.

use serde::Serialize;

use crate::agents::pivotal::{canonical_classes, general_pivots, pivotal_binary};
use crate::agents::{AgentSpec, HierarchySpec, Kind, LinearUtility, Relabeling, TableUtility};
use crate::binary_solver::{solve_binary, BinaryCase, EquilibriumReport};
use crate::error::{Error, Result};
use crate::general_solver::{solve_general_uniform, ConditionTrace, GeneralEquilibriumReport};
use crate::outcome::{Prior, EPS};

/// Default offset into the admissible interval, as a fraction of its length.
pub const DEFAULT_DELTA_FRACTION: f64 = 0.1;

/// One agent to append, with the threshold it realizes in the original labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VpTemplate {
    pub agent: AgentSpec,
    pub kind: Kind,
    pub leans_toward_one: bool,
    pub threshold: f64,
    /// Open interval of equally valid thresholds, when the rule allows a range.
    pub interval: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleFired {
    /// Binary state: a conformist between the two pivotal thresholds.
    BinaryPivot,
    /// Uniform prior: a conformist that becomes the new lowest conformist threshold.
    GeneralTowardOne,
    /// Uniform prior: a conformist leaning toward 0 that caps the upper posterior mean.
    GeneralTowardZero,
    /// Uniform prior: both of the above appended together.
    GeneralPair,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "game", rename_all = "snake_case")]
pub enum SolvedReport {
    Binary(EquilibriumReport),
    General(GeneralEquilibriumReport),
}

impl SolvedReport {
    pub fn receiver_value(&self) -> f64 {
        match self {
            SolvedReport::Binary(r) => r.receiver_value(),
            SolvedReport::General(r) => *r.values.last().expect("values include the receiver"),
        }
    }

    pub fn is_efficient(&self) -> bool {
        match self {
            SolvedReport::Binary(r) => r.efficiency.efficient,
            SolvedReport::General(r) => r.efficient,
        }
    }

    pub fn is_no_info(&self) -> bool {
        match self {
            SolvedReport::Binary(r) => r.support.is_degenerate(),
            SolvedReport::General(r) => r.support.is_degenerate(),
        }
    }

    pub fn support(&self) -> (f64, f64) {
        let s = match self {
            SolvedReport::Binary(r) => &r.support,
            SolvedReport::General(r) => &r.support,
        };
        (s.q0, s.q1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VpRecommendation {
    pub specs: Vec<VpTemplate>,
    pub rule_fired: RuleFired,
    pub before: SolvedReport,
    pub after: SolvedReport,
    pub receiver_gain: f64,
    /// The receiver's value rises as the appended threshold moves toward the lower end of `interval`.
    pub gain_increases_with_bias: bool,
    /// For a pair: both append orders give the same support.
    pub order_independent: Option<bool>,
    /// For a pair: largest receiver gain from appending a third copy of either template.
    pub third_copy_gain: Option<f64>,
}

fn relabel_agent(a: AgentSpec, r: Relabeling) -> AgentSpec {
    let a = if r.actions { a.swap_actions() } else { a };
    if r.states {
        a.swap_states()
    } else {
        a
    }
}

fn template(agent: AgentSpec, prior: Prior, interval: Option<(f64, f64)>, r: Relabeling) -> Result<VpTemplate> {
    let class = agent.classify(prior)?;
    let interval = interval.map(|(a, b)| {
        let (a, b) = (r.map_threshold(a), r.map_threshold(b));
        (a.min(b), a.max(b))
    });
    Ok(VpTemplate {
        kind: class.kind,
        leans_toward_one: class.bias.is_some_and(|b| b.is_one()),
        threshold: class.mu(),
        interval,
        agent,
    })
}

/// Binary-state recommendation with the default offset.
pub fn optimal_vp_binary(h: &HierarchySpec) -> Result<VpRecommendation> {
    optimal_vp_binary_with(h, None)
}

/// Binary-state recommendation placing the threshold `delta` inside the admissible
/// open interval, measured from its more biased end (canonical orientation).
/// `None` uses a tenth of the interval length.
pub fn optimal_vp_binary_with(h: &HierarchySpec, delta: Option<f64>) -> Result<VpRecommendation> {
    let Prior::Binary { .. } = h.prior else {
        return Err(Error::Unsupported("binary advisor needs a binary prior".into()));
    };
    let before = solve_binary(h)?;
    match before.case {
        BinaryCase::ExtremistReceiver => return Err(Error::NoImprovement("the receiver ignores all information".into())),
        BinaryCase::AllConformist => return Err(Error::NoImprovement("full information is already revealed".into())),
        BinaryCase::Blocked | BinaryCase::OpposedContrarian => {
            return Err(Error::NoImprovement("an earlier sender blocks information whatever is appended".into()))
        }
        BinaryCase::PivotBehind | BinaryCase::PivotAhead => {}
    }
    let piv = pivotal_binary(h)?;
    let (lo, hi) = (piv.d_star_threshold, piv.a_star_threshold);
    if hi - lo <= EPS {
        return Err(Error::NoImprovement("the admissible threshold interval is empty".into()));
    }
    let delta = delta.unwrap_or(DEFAULT_DELTA_FRACTION * (hi - lo));
    if !(delta > 0.0 && delta < hi - lo) {
        return Err(Error::Validation(format!("delta must lie in (0, {}), got {delta}", hi - lo)));
    }
    let mu = lo + delta;
    let canonical = AgentSpec::table("vp", TableUtility::quadratic_loss(2.0 * mu - 1.0));
    let vp = relabel_agent(canonical, piv.relabeling);
    let after = solve_binary(&h.with_appended(vp.clone())?)?;
    let spec = template(vp, h.prior, Some((lo, hi)), piv.relabeling)?;
    let gain = after.receiver_value() - before.receiver_value();
    Ok(VpRecommendation {
        specs: vec![spec],
        rule_fired: RuleFired::BinaryPivot,
        before: SolvedReport::Binary(before),
        after: SolvedReport::Binary(after),
        receiver_gain: gain,
        gain_increases_with_bias: true,
        order_independent: None,
        third_copy_gain: None,
    })
}

struct GeneralSetup {
    before: GeneralEquilibriumReport,
    relabeling: Relabeling,
    omega_r: f64,
    omega_p: f64,
    omega_dstar: f64,
    omega_ddstar: f64,
    /// Lower posterior mean of the current equilibrium, canonical orientation; 0.5 if nothing is revealed.
    m0: f64,
}

fn general_setup(h: &HierarchySpec) -> Result<GeneralSetup> {
    let before = solve_general_uniform(h)?;
    if matches!(before.trace, ConditionTrace::Condition1a | ConditionTrace::Condition1b) {
        return Err(Error::NoImprovement("an earlier sender blocks information whatever is appended".into()));
    }
    let (_, r, senders, receiver) = canonical_classes(h)?;
    let (piv, _) = general_pivots(&senders, &receiver, r)?;
    let g = piv.general.expect("general pivots present");
    let m0 = r.map_outcome(&before.support).q0;
    let omega_r = receiver.mu();
    if (m0 - 0.5 * omega_r).abs() <= 1e-12 {
        return Err(Error::NoImprovement("the receiver already gets his preferred split".into()));
    }
    Ok(GeneralSetup {
        before,
        relabeling: r,
        omega_r,
        omega_p: g.p_threshold,
        omega_dstar: g.d_star_threshold,
        omega_ddstar: g.d_dstar_threshold,
        m0,
    })
}

fn linear_vp(label: &str, omega: f64, r: Relabeling) -> AgentSpec {
    relabel_agent(AgentSpec::linear(label, LinearUtility::with_threshold(omega)), r)
}

fn receiver_value(r: &GeneralEquilibriumReport) -> f64 {
    *r.values.last().expect("values include the receiver")
}

/// Single appended agent under the uniform prior.
pub fn optimal_vp_general(h: &HierarchySpec) -> Result<VpRecommendation> {
    let s = general_setup(h)?;
    let half_r = 0.5 * s.omega_r;
    let toward_one = s.m0 > half_r + EPS || (s.m0 - s.omega_p).abs() <= EPS;
    let (omega, rule) = if toward_one {
        (s.omega_p.min(half_r.max(s.omega_ddstar)), RuleFired::GeneralTowardOne)
    } else {
        (half_r.min(s.omega_p) + 0.5, RuleFired::GeneralTowardZero)
    };
    let vp = linear_vp("vp", omega, s.relabeling);
    let after = solve_general_uniform(&h.with_appended(vp.clone())?)?;
    let gain = receiver_value(&after) - receiver_value(&s.before);
    Ok(VpRecommendation {
        specs: vec![template(vp, h.prior, None, s.relabeling)?],
        rule_fired: rule,
        before: SolvedReport::General(s.before),
        after: SolvedReport::General(after),
        receiver_gain: gain,
        gain_increases_with_bias: false,
        order_independent: None,
        third_copy_gain: None,
    })
}

/// Two appended agents under the uniform prior, checked in both orders and against a third copy.
pub fn optimal_two_vps(h: &HierarchySpec) -> Result<VpRecommendation> {
    let s = general_setup(h)?;
    let half_r = 0.5 * s.omega_r;
    let one = linear_vp("vp_one", s.omega_p.min(half_r.max(s.omega_dstar)), s.relabeling);
    let zero = linear_vp("vp_zero", half_r.min(s.omega_p) + 0.5, s.relabeling);
    let forward = h.with_appended(one.clone())?.with_appended(zero.clone())?;
    let backward = h.with_appended(zero.clone())?.with_appended(one.clone())?;
    let after = solve_general_uniform(&forward)?;
    let reverse = solve_general_uniform(&backward)?;
    let same = after.support.approx_eq(&reverse.support, 1e-12);
    let base = receiver_value(&after);
    let mut third = f64::NEG_INFINITY;
    for extra in [&one, &zero] {
        let more = solve_general_uniform(&forward.with_appended(extra.clone())?)?;
        third = third.max(receiver_value(&more) - base);
    }
    let gain = base - receiver_value(&s.before);
    Ok(VpRecommendation {
        specs: vec![template(one, h.prior, None, s.relabeling)?, template(zero, h.prior, None, s.relabeling)?],
        rule_fired: RuleFired::GeneralPair,
        before: SolvedReport::General(s.before),
        after: SolvedReport::General(after),
        receiver_gain: gain,
        gain_increases_with_bias: false,
        order_independent: Some(same),
        third_copy_gain: Some(third),
    })
}
