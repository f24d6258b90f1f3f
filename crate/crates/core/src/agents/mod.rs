//! Agent utilities and the conformist / contrarian / extremist taxonomy.

mod hierarchy;
pub(crate) mod pivotal;

pub use hierarchy::{canonicalize_receiver, HierarchySpec, Relabeling};
pub use pivotal::{
    binary_partition, pivotal_binary, pivotal_general, BinaryPartition, GeneralPivots, Pivot, PivotalReport,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::outcome::{Prior, UniformPrior, EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Zero,
    One,
}

impl Action {
    pub fn flip(self) -> Self {
        match self {
            Action::Zero => Action::One,
            Action::One => Action::Zero,
        }
    }

    pub fn from_bool(one: bool) -> Self {
        if one {
            Action::One
        } else {
            Action::Zero
        }
    }

    pub fn is_one(self) -> bool {
        self == Action::One
    }
}

/// Payoffs `u(state, action)` for a binary state and a binary action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableUtility {
    pub u00: f64,
    pub u10: f64,
    pub u01: f64,
    pub u11: f64,
}

impl TableUtility {
    /// Entries in the order u(0,0), u(1,0), u(0,1), u(1,1).
    pub fn new(u00: f64, u10: f64, u01: f64, u11: f64) -> Self {
        Self { u00, u10, u01, u11 }
    }

    /// `u(w, a) = -(a - w)^2 - alpha * a`, a conformist for |alpha| < 1.
    pub fn quadratic_loss(alpha: f64) -> Self {
        Self::new(0.0, -1.0, -1.0 - alpha, -alpha)
    }

    /// `u(w, a) = (a - w)^2 - alpha * (1 - a)`, a contrarian for |alpha| < 1.
    pub fn mismatch_reward(alpha: f64) -> Self {
        Self::new(-alpha, 1.0 - alpha, 1.0, 0.0)
    }

    pub fn payoff(&self, state_one: bool, a: Action) -> f64 {
        match (state_one, a) {
            (false, Action::Zero) => self.u00,
            (true, Action::Zero) => self.u10,
            (false, Action::One) => self.u01,
            (true, Action::One) => self.u11,
        }
    }

    /// Expected payoff of `a` at belief `q` that the state is 1.
    pub fn expected(&self, q: f64, a: Action) -> f64 {
        (1.0 - q) * self.payoff(false, a) + q * self.payoff(true, a)
    }

    /// Gain from action 1 over action 0 at belief `q`.
    pub fn gain_of_one(&self, q: f64) -> f64 {
        (1.0 - q) * (self.u01 - self.u00) + q * (self.u11 - self.u10)
    }

    pub fn affine(&self, scale: f64, shift: f64) -> Self {
        Self::new(
            scale * self.u00 + shift,
            scale * self.u10 + shift,
            scale * self.u01 + shift,
            scale * self.u11 + shift,
        )
    }

    pub fn swap_actions(&self) -> Self {
        Self::new(self.u01, self.u11, self.u00, self.u10)
    }

    pub fn swap_states(&self) -> Self {
        Self::new(self.u10, self.u00, self.u11, self.u01)
    }

    fn is_finite(&self) -> bool {
        [self.u00, self.u10, self.u01, self.u11].iter().all(|x| x.is_finite())
    }
}

/// Gain from action 1 that is linear in the state: `alpha * w + beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearUtility {
    pub alpha: f64,
    pub beta: f64,
}

impl LinearUtility {
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }

    /// Conformist-style agent indifferent at `omega` (`alpha = 1`).
    pub fn with_threshold(omega: f64) -> Self {
        Self::new(1.0, -omega)
    }

    pub fn gain_of_one(&self, w: f64) -> f64 {
        self.alpha * w + self.beta
    }

    /// Indifference state `-beta / alpha`.
    pub fn threshold(&self) -> f64 {
        -self.beta / self.alpha
    }

    /// Two-state table with `u(w, 0) = 0`, `u(w, 1) = alpha w + beta`.
    pub fn to_table(&self) -> TableUtility {
        TableUtility::new(0.0, 0.0, self.beta, self.alpha + self.beta)
    }

    pub fn swap_actions(&self) -> Self {
        Self::new(-self.alpha, -self.beta)
    }

    pub fn swap_states(&self) -> Self {
        Self::new(-self.alpha, self.alpha + self.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", content = "params", rename_all = "snake_case")]
pub enum Utility {
    Table(TableUtility),
    Linear(LinearUtility),
}

impl Utility {
    /// Two-state table view; linear agents use `u(w, 0) = 0`.
    pub fn table(&self) -> TableUtility {
        match self {
            Utility::Table(t) => *t,
            Utility::Linear(l) => l.to_table(),
        }
    }

    pub fn linear(&self) -> Option<LinearUtility> {
        match self {
            Utility::Linear(l) => Some(*l),
            Utility::Table(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub label: String,
    #[serde(flatten)]
    pub utility: Utility,
}

impl AgentSpec {
    pub fn table(label: impl Into<String>, t: TableUtility) -> Self {
        Self { label: label.into(), utility: Utility::Table(t) }
    }

    pub fn linear(label: impl Into<String>, l: LinearUtility) -> Self {
        Self { label: label.into(), utility: Utility::Linear(l) }
    }

    /// Classifies under `prior`; tables require a binary prior.
    pub fn classify(&self, prior: Prior) -> Result<AgentClass> {
        let classified = match (prior, &self.utility) {
            (Prior::Binary { p }, u) => classify_binary(&u.table(), p),
            (Prior::Uniform, Utility::Linear(l)) => classify_linear(l, UniformPrior),
            (Prior::Uniform, Utility::Table(_)) => {
                return Err(Error::Unsupported(format!(
                    "agent `{}` has a table utility; a uniform prior needs linear utilities",
                    self.label
                )))
            }
        };
        classified.map_err(|e| match e {
            Error::DegenerateAgent(_) => Error::DegenerateAgent(self.label.clone()),
            Error::ThresholdCollision(msg) => Error::ThresholdCollision(format!("agent `{}`: {msg}", self.label)),
            other => other,
        })
    }

    pub fn swap_actions(&self) -> Self {
        let utility = match self.utility {
            Utility::Table(t) => Utility::Table(t.swap_actions()),
            Utility::Linear(l) => Utility::Linear(l.swap_actions()),
        };
        Self { label: self.label.clone(), utility }
    }

    pub fn swap_states(&self) -> Self {
        let utility = match self.utility {
            Utility::Table(t) => Utility::Table(t.swap_states()),
            Utility::Linear(l) => Utility::Linear(l.swap_states()),
        };
        Self { label: self.label.clone(), utility }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Conformist,
    Contrarian,
    ZeroExtremist,
    OneExtremist,
}

impl Kind {
    pub fn is_extremist(self) -> bool {
        matches!(self, Kind::ZeroExtremist | Kind::OneExtremist)
    }

    fn extremist_for(a: Action) -> Self {
        match a {
            Action::Zero => Kind::ZeroExtremist,
            Action::One => Kind::OneExtremist,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentClass {
    pub kind: Kind,
    /// Indifference belief (or mean); `None` for extremists.
    pub threshold: Option<f64>,
    pub bias: Option<Action>,
    pub bias_magnitude: Option<f64>,
}

impl AgentClass {
    fn extremist(a: Action) -> Self {
        Self { kind: Kind::extremist_for(a), threshold: None, bias: None, bias_magnitude: None }
    }

    fn interior(kind: Kind, mu: f64, anchor: f64) -> Self {
        let toward_one = match kind {
            Kind::Conformist => mu < anchor,
            _ => mu > anchor,
        };
        Self {
            kind,
            threshold: Some(mu),
            bias: Some(Action::from_bool(toward_one)),
            bias_magnitude: Some((anchor - mu).abs()),
        }
    }

    pub fn is(&self, kind: Kind) -> bool {
        self.kind == kind
    }

    /// Threshold of a non-extremist, `NaN` otherwise.
    pub fn mu(&self) -> f64 {
        self.threshold.unwrap_or(f64::NAN)
    }
}

/// Belief at which the agent is indifferent between the two actions.
pub fn indifference_belief(u: &TableUtility) -> Result<f64> {
    let num = u.u00 - u.u01;
    let den = num + (u.u11 - u.u10);
    if !u.is_finite() || den == 0.0 {
        return Err(Error::DegenerateAgent(String::new()));
    }
    Ok(num / den)
}

fn check_interior(mu: f64, anchor: f64, anchor_name: &str) -> Result<()> {
    if (mu - anchor).abs() <= EPS {
        return Err(Error::ThresholdCollision(format!("threshold collides with {anchor_name} ({mu})")));
    }
    if mu.abs() <= EPS || (mu - 1.0).abs() <= EPS {
        return Err(Error::ThresholdCollision(format!("threshold collides with 0 or 1 ({mu})")));
    }
    Ok(())
}

pub fn classify_binary(u: &TableUtility, p: f64) -> Result<AgentClass> {
    let mu = indifference_belief(u)?;
    check_interior(mu, p, "prior")?;
    let likes_one_at_one = u.u11 > u.u10;
    if mu <= 0.0 || mu >= 1.0 {
        return Ok(AgentClass::extremist(Action::from_bool(likes_one_at_one)));
    }
    let kind = if likes_one_at_one { Kind::Conformist } else { Kind::Contrarian };
    Ok(AgentClass::interior(kind, mu, p))
}

pub fn classify_linear(u: &LinearUtility, prior: UniformPrior) -> Result<AgentClass> {
    if u.alpha == 0.0 || !u.alpha.is_finite() || !u.beta.is_finite() {
        return Err(Error::DegenerateAgent(String::new()));
    }
    let m = prior.mean();
    let omega = u.threshold();
    check_interior(omega, m, "prior mean")?;
    if omega <= 0.0 || omega >= 1.0 {
        return Ok(AgentClass::extremist(Action::from_bool(u.gain_of_one(m) > 0.0)));
    }
    let kind = if u.alpha > 0.0 { Kind::Conformist } else { Kind::Contrarian };
    Ok(AgentClass::interior(kind, omega, m))
}

/// Class of an agent inside the subgame where player 1 chose means `{m0, m1}`.
pub fn reclassify_under_support(agent: &AgentClass, m0: f64, m1: f64) -> Result<AgentClass> {
    let m = UniformPrior::MEAN;
    if !(0.0 <= m0 && m0 < m1 && m1 <= 1.0) {
        return Err(Error::OrderViolation { q0: m0, p: m, q1: m1 });
    }
    let (Some(omega), Some(bias)) = (agent.threshold, agent.bias) else {
        return Ok(*agent);
    };
    if omega < m0 || omega > m1 {
        return Ok(AgentClass::extremist(bias));
    }
    let width = m1 - m0;
    Ok(AgentClass::interior(agent.kind, (omega - m0) / width, (m - m0) / width))
}
