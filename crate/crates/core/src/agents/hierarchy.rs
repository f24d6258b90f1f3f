use serde::{Deserialize, Serialize};

use super::{Action, AgentClass, AgentSpec, Kind};
use crate::error::{Error, Result};
use crate::outcome::{BinaryOutcome, Prior, EPS};

/// An ordered chain of senders (index 1 farthest from the receiver) and a receiver.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HierarchySpec {
    pub prior: Prior,
    pub receiver: AgentSpec,
    pub senders: Vec<AgentSpec>,
    #[serde(skip)]
    allow_ties: bool,
}

impl HierarchySpec {
    /// Validated hierarchy: at least one sender, every agent classifiable,
    /// interior thresholds pairwise distinct and away from {0, prior, 1}.
    pub fn new(prior: Prior, senders: Vec<AgentSpec>, receiver: AgentSpec) -> Result<Self> {
        if senders.is_empty() {
            return Err(Error::Validation("a hierarchy needs at least one sender".into()));
        }
        let h = Self { prior, receiver, senders, allow_ties: false };
        h.validate()?;
        Ok(h)
    }

    /// Skips validation. Used for derived games (reduced games, subgames)
    /// whose thresholds may legitimately sit on a boundary.
    pub fn new_unchecked(prior: Prior, senders: Vec<AgentSpec>, receiver: AgentSpec) -> Self {
        Self { prior, receiver, senders, allow_ties: true }
    }

    /// Appends an agent next to the receiver. Duplicate thresholds are
    /// allowed afterwards; ties among pivots go to the agent closest to
    /// the receiver.
    pub fn with_appended(&self, agent: AgentSpec) -> Result<Self> {
        let mut senders = self.senders.clone();
        senders.push(agent);
        let h = Self { prior: self.prior, receiver: self.receiver.clone(), senders, allow_ties: true };
        h.validate()?;
        Ok(h)
    }

    pub fn n(&self) -> usize {
        self.senders.len()
    }

    pub fn anchor(&self) -> f64 {
        self.prior.anchor()
    }

    pub fn allows_ties(&self) -> bool {
        self.allow_ties
    }

    /// Sender `i`, 1-based.
    pub fn sender(&self, i: usize) -> &AgentSpec {
        &self.senders[i - 1]
    }

    /// Classes of the senders (in order) and of the receiver.
    pub fn classes(&self) -> Result<(Vec<AgentClass>, AgentClass)> {
        let senders = self.senders.iter().map(|a| a.classify(self.prior)).collect::<Result<Vec<_>>>()?;
        Ok((senders, self.receiver.classify(self.prior)?))
    }

    fn validate(&self) -> Result<()> {
        let (senders, receiver) = self.classes().map_err(|e| match e {
            Error::ThresholdCollision(msg) if msg.contains("prior") => {
                Error::Validation(format!("threshold collides with prior: {msg}"))
            }
            Error::ThresholdCollision(msg) => Error::Validation(format!("threshold collides with 0 or 1: {msg}")),
            other => other,
        })?;
        if self.allow_ties {
            return Ok(());
        }
        let mut seen: Vec<(f64, &str)> = Vec::new();
        let agents = self.senders.iter().chain(std::iter::once(&self.receiver));
        for (class, agent) in senders.iter().chain(std::iter::once(&receiver)).zip(agents) {
            let Some(mu) = class.threshold else { continue };
            if let Some((_, other)) = seen.iter().find(|(t, _)| (t - mu).abs() <= EPS) {
                return Err(Error::Validation(format!(
                    "thresholds must be pairwise distinct: `{other}` and `{}` share {mu}",
                    agent.label
                )));
            }
            seen.push((mu, &agent.label));
        }
        Ok(())
    }

    /// Applies a relabeling to every agent and to the prior.
    pub fn relabeled(&self, r: Relabeling) -> Self {
        let map = |a: &AgentSpec| {
            let a = if r.actions { a.swap_actions() } else { a.clone() };
            if r.states {
                a.swap_states()
            } else {
                a
            }
        };
        let prior = match self.prior {
            Prior::Binary { p } if r.states => Prior::Binary { p: 1.0 - p },
            other => other,
        };
        Self {
            prior,
            receiver: map(&self.receiver),
            senders: self.senders.iter().map(map).collect(),
            allow_ties: self.allow_ties,
        }
    }
}

/// Which labels were swapped to put the receiver in canonical form
/// (a conformist biased toward action 1). Both swaps are involutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Relabeling {
    pub actions: bool,
    pub states: bool,
}

impl Relabeling {
    pub const IDENTITY: Relabeling = Relabeling { actions: false, states: false };

    pub fn is_identity(self) -> bool {
        self == Self::IDENTITY
    }

    /// Maps an outcome between the two orientations.
    pub fn map_outcome(self, out: &BinaryOutcome) -> BinaryOutcome {
        if !self.states {
            return *out;
        }
        BinaryOutcome { q0: 1.0 - out.q1, q1: 1.0 - out.q0, p: 1.0 - out.p, w0: out.w1, w1: out.w0 }
    }

    pub fn map_threshold(self, mu: f64) -> f64 {
        if self.states {
            1.0 - mu
        } else {
            mu
        }
    }

    pub fn map_action(self, a: Action) -> Action {
        if self.actions {
            a.flip()
        } else {
            a
        }
    }
}

/// Relabels actions and/or states so the receiver becomes a conformist biased toward 1.
pub fn canonicalize_receiver(h: &HierarchySpec) -> Result<(HierarchySpec, Relabeling)> {
    let r = receiver_relabeling(&h.receiver.classify(h.prior)?)?;
    Ok((h.relabeled(r), r))
}

pub(crate) fn receiver_relabeling(receiver: &AgentClass) -> Result<Relabeling> {
    let toward_one = receiver.bias == Some(Action::One);
    match receiver.kind {
        Kind::ZeroExtremist | Kind::OneExtremist => Err(Error::ExtremistReceiver),
        // a conformist biased toward 1 has its threshold below the prior
        Kind::Conformist => Ok(Relabeling { actions: !toward_one, states: !toward_one }),
        Kind::Contrarian => Ok(Relabeling { actions: !toward_one, states: toward_one }),
    }
}
