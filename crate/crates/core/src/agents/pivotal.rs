use serde::{Deserialize, Serialize};

use super::{canonicalize_receiver, AgentClass, HierarchySpec, Kind, Relabeling};
use crate::error::{Error, Result};
use crate::outcome::{Prior, UniformPrior, EPS};

/// A position in the chain; the receiver sits after sender `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pivot {
    Sender(usize),
    Receiver,
}

impl Pivot {
    /// Position with the receiver at `n + 1`.
    pub fn position(self, n: usize) -> usize {
        match self {
            Pivot::Sender(i) => i,
            Pivot::Receiver => n + 1,
        }
    }
}

/// Pivotal agents and thresholds, in the canonical orientation described by `relabeling`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotalReport {
    pub relabeling: Relabeling,
    pub a_star: Pivot,
    pub a_star_threshold: f64,
    pub e_star: Option<usize>,
    pub d_star_threshold: f64,
    pub a_star_e: Pivot,
    pub general: Option<GeneralPivots>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralPivots {
    pub p_pivot: Pivot,
    pub p_threshold: f64,
    pub b_star_threshold: f64,
    pub b_star_p_threshold: f64,
    pub d_dstar_threshold: f64,
    pub d_star_threshold: f64,
}

/// Senders sorted into the canonical-orientation groups (1-based indices).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BinaryPartition {
    /// Conformists more biased toward 1 than the receiver.
    pub a: Vec<usize>,
    /// Conformists biased toward 0.
    pub b: Vec<usize>,
    /// Contrarians with thresholds above the receiver's.
    pub c: Vec<usize>,
    /// Contrarians with thresholds below the receiver's.
    pub d: Vec<usize>,
    pub e0: Vec<usize>,
    pub e1: Vec<usize>,
}

impl BinaryPartition {
    pub fn all_conformist(&self) -> bool {
        self.c.is_empty() && self.d.is_empty() && self.e0.is_empty() && self.e1.is_empty()
    }
}

/// Groups `(index, class)` pairs against receiver threshold `mu_r` and anchor `p`.
pub fn binary_partition(senders: &[(usize, AgentClass)], mu_r: f64, p: f64) -> BinaryPartition {
    let mut part = BinaryPartition::default();
    for &(i, c) in senders {
        match c.kind {
            Kind::Conformist if c.mu() < mu_r => part.a.push(i),
            Kind::Conformist if c.mu() > p => part.b.push(i),
            Kind::Conformist => {}
            Kind::Contrarian if c.mu() > mu_r => part.c.push(i),
            Kind::Contrarian => part.d.push(i),
            Kind::ZeroExtremist => part.e0.push(i),
            Kind::OneExtremist => part.e1.push(i),
        }
    }
    part
}

/// Lowest threshold among `members`; equal thresholds go to the later index.
fn lowest(members: impl IntoIterator<Item = (usize, f64)>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, t) in members {
        match best {
            Some((_, b)) if t > b + EPS => {}
            Some((_, b)) if t >= b - EPS && t <= b + EPS => best = Some((i, b.min(t))),
            _ => best = Some((i, t)),
        }
    }
    best
}

fn highest(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    values.into_iter().fold(None, |acc, t| Some(acc.map_or(t, |a: f64| a.max(t))))
}

pub(crate) fn binary_pivots(
    senders: &[(usize, AgentClass)],
    mu_r: f64,
    p: f64,
    relabeling: Relabeling,
) -> (PivotalReport, BinaryPartition) {
    let part = binary_partition(senders, mu_r, p);
    let mu = |i: usize| senders.iter().find(|(j, _)| *j == i).map(|(_, c)| c.mu()).unwrap_or(f64::NAN);
    let (a_star, a_star_threshold) = match lowest(part.a.iter().map(|&i| (i, mu(i)))) {
        Some((i, t)) => (Pivot::Sender(i), t),
        None => (Pivot::Receiver, mu_r),
    };
    let e_star = part.d.iter().chain(&part.e0).copied().max();
    let d_star_threshold =
        highest(part.d.iter().map(|&i| mu(i)).filter(|&t| t < a_star_threshold)).unwrap_or(0.0);
    let behind = part.a.iter().filter(|&&i| e_star.is_none_or(|e| i > e)).map(|&i| (i, mu(i)));
    let a_star_e = lowest(behind).map_or(Pivot::Receiver, |(i, _)| Pivot::Sender(i));
    let report = PivotalReport { relabeling, a_star, a_star_threshold, e_star, d_star_threshold, a_star_e, general: None };
    (report, part)
}

/// Canonical classes of the senders and the receiver.
pub(crate) fn canonical_classes(h: &HierarchySpec) -> Result<(HierarchySpec, Relabeling, Vec<AgentClass>, AgentClass)> {
    let (c, r) = canonicalize_receiver(h)?;
    let (senders, receiver) = c.classes()?;
    Ok((c, r, senders, receiver))
}

/// Pivotal agents of a binary-state chain.
pub fn pivotal_binary(h: &HierarchySpec) -> Result<PivotalReport> {
    let (c, r, senders, receiver) = canonical_classes(h)?;
    let indexed: Vec<_> = senders.into_iter().enumerate().map(|(k, cl)| (k + 1, cl)).collect();
    Ok(binary_pivots(&indexed, receiver.mu(), c.anchor(), r).0)
}

/// Pivotal agents of the uniform-prior game. A*, E*, D* range over senders
/// 2..n; P ranges over every conformist with an interior threshold,
/// player 1 and the receiver included.
pub fn pivotal_general(h: &HierarchySpec) -> Result<PivotalReport> {
    if !matches!(h.prior, Prior::Uniform) {
        return Err(Error::Unsupported("general pivots need a uniform prior".into()));
    }
    let (_, r, senders, receiver) = canonical_classes(h)?;
    Ok(general_pivots(&senders, &receiver, r)?.0)
}

pub(crate) fn general_pivots(
    senders: &[AgentClass],
    receiver: &AgentClass,
    relabeling: Relabeling,
) -> Result<(PivotalReport, BinaryPartition)> {
    let m = UniformPrior::MEAN;
    let n = senders.len();
    let omega_r = receiver.mu();
    let rest: Vec<_> = senders.iter().enumerate().skip(1).map(|(k, c)| (k + 1, *c)).collect();
    let (mut report, part) = binary_pivots(&rest, omega_r, m, relabeling);

    let conformists = senders
        .iter()
        .enumerate()
        .map(|(k, c)| (k + 1, *c))
        .chain(std::iter::once((n + 1, *receiver)))
        .filter(|(_, c)| c.kind == Kind::Conformist)
        .map(|(i, c)| (i, c.mu()));
    let (p_pos, p_threshold) = lowest(conformists).ok_or(Error::NoConformist)?;
    let p_pivot = if p_pos == n + 1 { Pivot::Receiver } else { Pivot::Sender(p_pos) };

    let omega = |i: usize| senders[i - 1].mu();
    let b_star_threshold = highest(part.b.iter().map(|&i| omega(i))).unwrap_or(m);
    let b_star_p_threshold = highest(part.b.iter().filter(|&&i| i > p_pos).map(|&i| omega(i))).unwrap_or(m);
    let d_dstar_threshold = highest(part.d.iter().map(|&i| omega(i)).filter(|&t| t < p_threshold)).unwrap_or(0.0);
    let first = senders[0];
    let d_star_threshold = if first.kind == Kind::Contrarian && first.mu() < p_threshold {
        d_dstar_threshold.max(first.mu())
    } else {
        d_dstar_threshold
    };
    report.general = Some(GeneralPivots {
        p_pivot,
        p_threshold,
        b_star_threshold,
        b_star_p_threshold,
        d_dstar_threshold,
        d_star_threshold,
    });
    Ok((report, part))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{AgentSpec, LinearUtility, TableUtility};

    fn conf(mu: f64) -> AgentSpec {
        AgentSpec::table(format!("conf{mu}"), TableUtility::quadratic_loss(2.0 * mu - 1.0))
    }

    fn contr(mu: f64) -> AgentSpec {
        AgentSpec::table(format!("contr{mu}"), TableUtility::mismatch_reward(2.0 * mu - 1.0))
    }

    fn lin(omega: f64) -> AgentSpec {
        AgentSpec::linear(format!("w{omega}"), LinearUtility::with_threshold(omega))
    }

    fn binary(senders: Vec<AgentSpec>) -> HierarchySpec {
        HierarchySpec::new(Prior::binary(0.6).unwrap(), senders, conf(0.4)).unwrap()
    }

    #[test]
    fn mixed_chain_pivots() {
        let r = pivotal_binary(&binary(vec![conf(0.25), contr(0.1), conf(0.3)])).unwrap();
        assert_eq!(r.a_star, Pivot::Sender(1));
        assert_eq!(r.e_star, Some(2));
        assert!((r.d_star_threshold - 0.1).abs() < 1e-12);
        assert_eq!(r.a_star_e, Pivot::Sender(3));
    }

    #[test]
    fn all_conformist_pivots() {
        let r = pivotal_binary(&binary(vec![conf(0.25), conf(0.3), conf(0.7)])).unwrap();
        assert_eq!(r.e_star, None);
        assert_eq!(r.d_star_threshold, 0.0);
        assert_eq!(r.a_star, Pivot::Sender(1));
    }

    #[test]
    fn empty_a_means_receiver() {
        let r = pivotal_binary(&binary(vec![conf(0.45), conf(0.7)])).unwrap();
        assert_eq!(r.a_star, Pivot::Receiver);
        assert!((r.a_star_threshold - 0.4).abs() < 1e-12);
    }

    #[test]
    fn general_example() {
        let h = HierarchySpec::new(Prior::Uniform, vec![lin(0.32), lin(0.2), lin(0.58)], lin(0.3)).unwrap();
        let r = pivotal_general(&h).unwrap();
        let g = r.general.unwrap();
        assert_eq!(g.p_pivot, Pivot::Sender(2));
        assert!((g.p_threshold - 0.2).abs() < 1e-12);
        assert!((g.b_star_threshold - 0.58).abs() < 1e-12);
        assert!((g.b_star_p_threshold - 0.58).abs() < 1e-12);
        assert_eq!(g.d_dstar_threshold, 0.0);
        assert_eq!(g.d_star_threshold, 0.0);
    }

    #[test]
    fn general_defaults_and_contrarian_first() {
        let contrarian = AgentSpec::linear("c", LinearUtility::new(-1.0, 0.1));
        let h = HierarchySpec::new(Prior::Uniform, vec![contrarian, lin(0.2)], lin(0.3)).unwrap();
        let g = pivotal_general(&h).unwrap().general.unwrap();
        assert_eq!(g.b_star_threshold, 0.5);
        assert_eq!(g.b_star_p_threshold, 0.5);
        assert_eq!(g.d_dstar_threshold, 0.0);
        assert!((g.d_star_threshold - 0.1).abs() < 1e-12);
    }

    #[test]
    fn duplicate_thresholds_go_to_the_later_agent() {
        let h = HierarchySpec::new(Prior::Uniform, vec![lin(0.32), lin(0.2)], lin(0.3)).unwrap();
        let h = h.with_appended(lin(0.2)).unwrap();
        let g = pivotal_general(&h).unwrap().general.unwrap();
        assert_eq!(g.p_pivot, Pivot::Sender(3));
    }
}
