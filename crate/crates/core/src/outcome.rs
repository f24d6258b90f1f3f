//! Binary-support posterior distributions and their convex order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Float tolerance for ordering and stochasticity checks.
pub const EPS: f64 = 1e-12;

/// Probability that the state is 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryPrior {
    p: f64,
}

impl BinaryPrior {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_finite() && p > 0.0 && p < 1.0 {
            Ok(Self { p })
        } else {
            Err(Error::InvalidPrior(p))
        }
    }

    pub fn p(self) -> f64 {
        self.p
    }
}

/// Uniform distribution of the state on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UniformPrior;

impl UniformPrior {
    pub const MEAN: f64 = 0.5;

    pub fn mean(self) -> f64 {
        Self::MEAN
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Prior {
    Binary { p: f64 },
    Uniform,
}

impl Prior {
    pub fn binary(p: f64) -> Result<Self> {
        BinaryPrior::new(p).map(Self::from)
    }

    /// The point every outcome averages back to: `p`, or the mean 0.5.
    pub fn anchor(self) -> f64 {
        match self {
            Prior::Binary { p } => p,
            Prior::Uniform => UniformPrior::MEAN,
        }
    }

    pub fn is_uniform(self) -> bool {
        matches!(self, Prior::Uniform)
    }
}

impl From<BinaryPrior> for Prior {
    fn from(b: BinaryPrior) -> Self {
        Prior::Binary { p: b.p }
    }
}

impl From<UniformPrior> for Prior {
    fn from(_: UniformPrior) -> Self {
        Prior::Uniform
    }
}

/// A distribution over two receiver posteriors `q0 <= p <= q1`.
///
/// Under the uniform prior the coordinates are posterior means and `p = 0.5`.
/// An outcome with `q0 = q1`, or with either posterior at the anchor, carries
/// no information and is stored as the degenerate `{p}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryOutcome {
    pub q0: f64,
    pub q1: f64,
    pub p: f64,
    pub w0: f64,
    pub w1: f64,
}

impl BinaryOutcome {
    pub fn no_info(p: f64) -> Self {
        Self { q0: p, q1: p, p, w0: 1.0, w1: 0.0 }
    }

    pub fn full_info(p: f64) -> Self {
        Self { q0: 0.0, q1: 1.0, p, w0: 1.0 - p, w1: p }
    }

    pub fn is_degenerate(&self) -> bool {
        self.q0 == self.q1
    }

    pub fn is_full_info(&self) -> bool {
        self.q0 == 0.0 && self.q1 == 1.0
    }

    /// Bayes-plausibility residual `w0 q0 + w1 q1 - p`.
    pub fn plausibility_gap(&self) -> f64 {
        self.w0 * self.q0 + self.w1 * self.q1 - self.p
    }

    /// Same posteriors, compared with tolerance `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self.q0 - other.q0).abs() <= tol
            && (self.q1 - other.q1).abs() <= tol
            && (self.p - other.p).abs() <= tol
    }
}

/// Builds the Bayes-plausible outcome on `{q0, q1}` around `prior`.
pub fn make_outcome(q0: f64, q1: f64, prior: impl Into<Prior>) -> Result<BinaryOutcome> {
    outcome_at(q0, q1, prior.into().anchor())
}

/// [`make_outcome`] with the anchor given directly.
pub fn outcome_at(q0: f64, q1: f64, p: f64) -> Result<BinaryOutcome> {
    let ordered = q0.is_finite()
        && q1.is_finite()
        && q0 >= -EPS
        && q1 <= 1.0 + EPS
        && q0 <= p + EPS
        && p <= q1 + EPS;
    if !ordered {
        return Err(Error::OrderViolation { q0, p, q1 });
    }
    let q0 = q0.clamp(0.0, p);
    let q1 = q1.clamp(p, 1.0);
    if q1 - q0 <= EPS || p - q0 <= EPS || q1 - p <= EPS {
        return Ok(BinaryOutcome::no_info(p));
    }
    let w1 = (p - q0) / (q1 - q0);
    let w0 = (q1 - p) / (q1 - q0);
    Ok(BinaryOutcome { q0, q1, p, w0, w1 })
}

/// True when `inner` is a mean-preserving contraction of `outer`.
pub fn is_mpc(inner: &BinaryOutcome, outer: &BinaryOutcome) -> Result<bool> {
    if (inner.p - outer.p).abs() > EPS {
        return Err(Error::PriorMismatch(inner.p, outer.p));
    }
    if inner.is_degenerate() {
        return Ok(true);
    }
    Ok(outer.q0 <= inner.q0 + EPS && inner.q1 <= outer.q1 + EPS)
}

/// Whether `{m0, m1}` is a posterior-mean support reachable under the uniform prior.
pub fn mpc_feasible_uniform(m0: f64, m1: f64) -> Result<bool> {
    let m = UniformPrior::MEAN;
    if !(m0 >= 0.0 && m0 <= m && m <= m1 && m1 <= 1.0) {
        return Err(Error::OrderViolation { q0: m0, p: m, q1: m1 });
    }
    Ok(m1 - m0 <= 0.5 + EPS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_of_partial_outcome() {
        let o = make_outcome(0.25, 1.0, BinaryPrior::new(0.6).unwrap()).unwrap();
        assert!((o.w1 - 7.0 / 15.0).abs() < 1e-15);
        assert!((o.w0 - 8.0 / 15.0).abs() < 1e-15);
        assert!(o.plausibility_gap().abs() < 1e-12);
    }

    #[test]
    fn equal_posteriors_collapse_to_no_info() {
        let o = make_outcome(0.6, 0.6, Prior::binary(0.6).unwrap()).unwrap();
        assert_eq!(o, BinaryOutcome::no_info(0.6));
        let o = make_outcome(0.3, 0.6, Prior::binary(0.6).unwrap()).unwrap();
        assert!(o.is_degenerate());
    }

    #[test]
    fn full_information_weights_equal_prior() {
        let o = make_outcome(0.0, 1.0, Prior::binary(0.6).unwrap()).unwrap();
        assert!((o.w1 - 0.6).abs() < 1e-15 && (o.w0 - 0.4).abs() < 1e-15);
    }

    #[test]
    fn out_of_order_rejected() {
        assert!(matches!(
            make_outcome(0.7, 0.9, Prior::binary(0.6).unwrap()),
            Err(Error::OrderViolation { .. })
        ));
        assert!(make_outcome(-0.1, 0.9, Prior::binary(0.6).unwrap()).is_err());
        assert!(BinaryPrior::new(1.0).is_err());
    }

    #[test]
    fn containment() {
        let p = Prior::binary(0.6).unwrap();
        let a = make_outcome(0.3, 0.9, p).unwrap();
        let b = make_outcome(0.1, 1.0, p).unwrap();
        assert!(is_mpc(&a, &b).unwrap());
        assert!(!is_mpc(&b, &a).unwrap());
        assert!(is_mpc(&a, &a).unwrap());
        let other = make_outcome(0.1, 1.0, Prior::binary(0.5).unwrap()).unwrap();
        assert!(matches!(is_mpc(&a, &other), Err(Error::PriorMismatch(..))));
    }

    #[test]
    fn uniform_feasibility() {
        assert!(mpc_feasible_uniform(0.2, 0.7).unwrap());
        assert!(!mpc_feasible_uniform(0.1, 0.9).unwrap());
        assert!(mpc_feasible_uniform(0.0, 0.5).unwrap());
        assert!(mpc_feasible_uniform(0.6, 0.7).is_err());
    }
}
