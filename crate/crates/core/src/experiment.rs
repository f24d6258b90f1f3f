//! Finite experiments: row-stochastic maps from an input alphabet to signals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::outcome::{outcome_at, BinaryOutcome, BinaryPrior, EPS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Experiment {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Experiment {
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let rows = matrix.len();
        let cols = matrix.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::NotStochastic("empty matrix".into()));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for (r, row) in matrix.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::NotStochastic(format!("row {r} has {} entries, expected {cols}", row.len())));
            }
            if row.iter().any(|&x| !(x >= 0.0 && x <= 1.0)) {
                return Err(Error::NotStochastic(format!("row {r} has an entry outside [0, 1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > EPS {
                return Err(Error::NotStochastic(format!("row {r} sums to {sum}")));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn identity(k: usize) -> Self {
        let mut data = vec![0.0; k * k];
        for i in 0..k {
            data[i * k + i] = 1.0;
        }
        Self { rows: k, cols: k, data }
    }

    /// The binary experiment that sends every state to a fair coin.
    pub fn uninformative() -> Self {
        Self { rows: 2, cols: 2, data: vec![0.5; 4] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Probability of output `s` given input `r`.
    pub fn get(&self, r: usize, s: usize) -> f64 {
        self.data[r * self.cols + s]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    /// Runs `self` first and feeds its signal into `second`.
    pub fn compose(&self, second: &Experiment) -> Result<Experiment> {
        if self.cols != second.rows {
            return Err(Error::DimensionMismatch { left: self.cols, right: second.rows });
        }
        let mut data = vec![0.0; self.rows * second.cols];
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0.0 {
                    continue;
                }
                for c in 0..second.cols {
                    data[r * second.cols + c] += a * second.get(k, c);
                }
            }
        }
        Ok(Experiment { rows: self.rows, cols: second.cols, data })
    }

    /// Binary experiment inducing `out`: signal 1 leads to `q1`, signal 0 to `q0`.
    pub fn from_outcome(out: &BinaryOutcome) -> Experiment {
        if out.is_degenerate() {
            return Self::uninformative();
        }
        let p = out.p;
        let on_one = (out.w1 * out.q1 / p).clamp(0.0, 1.0);
        let on_zero = (out.w1 * (1.0 - out.q1) / (1.0 - p)).clamp(0.0, 1.0);
        Experiment {
            rows: 2,
            cols: 2,
            data: vec![1.0 - on_zero, on_zero, 1.0 - on_one, on_one],
        }
    }
}

impl TryFrom<Vec<Vec<f64>>> for Experiment {
    type Error = Error;

    fn try_from(m: Vec<Vec<f64>>) -> Result<Self> {
        Experiment::new(m)
    }
}

impl From<Experiment> for Vec<Vec<f64>> {
    fn from(e: Experiment) -> Self {
        e.to_rows()
    }
}

/// Folds a chain of experiments into the aggregate experiment.
pub fn compose_chain(chain: &[Experiment]) -> Result<Experiment> {
    let (first, rest) = chain
        .split_first()
        .ok_or_else(|| Error::NotStochastic("empty experiment chain".into()))?;
    rest.iter().try_fold(first.clone(), |acc, e| acc.compose(e))
}

/// Posterior that the state is 1 after each signal, `None` for signals never sent.
pub fn posteriors(prior: BinaryPrior, pi: &Experiment) -> Result<Vec<Option<f64>>> {
    if pi.rows() != 2 {
        return Err(Error::DimensionMismatch { left: 2, right: pi.rows() });
    }
    let p = prior.p();
    Ok((0..pi.cols())
        .map(|s| {
            let one = p * pi.get(1, s);
            let total = one + (1.0 - p) * pi.get(0, s);
            (total > 0.0).then(|| one / total)
        })
        .collect())
}

/// Distribution of receiver posteriors induced by a two-signal experiment.
pub fn outcome_of_experiment(prior: BinaryPrior, pi: &Experiment) -> Result<BinaryOutcome> {
    if pi.cols() != 2 {
        return Err(Error::DimensionMismatch { left: pi.cols(), right: 2 });
    }
    let post = posteriors(prior, pi)?;
    let mut qs = Vec::with_capacity(2);
    for (s, q) in post.into_iter().enumerate() {
        qs.push(q.ok_or(Error::ZeroProbabilitySignal(s))?);
    }
    let (lo, hi) = if qs[0] <= qs[1] { (qs[0], qs[1]) } else { (qs[1], qs[0]) };
    outcome_at(lo, hi, prior.p())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prior() -> BinaryPrior {
        BinaryPrior::new(0.6).unwrap()
    }

    #[test]
    fn identity_reveals_the_state() {
        let o = outcome_of_experiment(prior(), &Experiment::identity(2)).unwrap();
        assert!(o.is_full_info());
    }

    #[test]
    fn coin_flip_reveals_nothing() {
        let o = outcome_of_experiment(prior(), &Experiment::uninformative()).unwrap();
        assert_eq!(o, BinaryOutcome::no_info(0.6));
    }

    #[test]
    fn hand_computed_posteriors() {
        let pi = Experiment::new(vec![vec![7.0 / 8.0, 1.0 / 8.0], vec![0.25, 0.75]]).unwrap();
        let o = outcome_of_experiment(prior(), &pi).unwrap();
        // 0.15 / (0.15 + 0.35) and 0.45 / (0.45 + 0.05)
        assert!((o.q0 - 0.3).abs() < 1e-12);
        assert!((o.q1 - 0.9).abs() < 1e-12);
        assert!(o.plausibility_gap().abs() < 1e-12);
    }

    #[test]
    fn garbling_to_uninformative() {
        let g = Experiment::identity(2).compose(&Experiment::uninformative()).unwrap();
        assert_eq!(g, Experiment::uninformative());
    }

    #[test]
    fn zero_marginal_signal() {
        let pi = Experiment::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(outcome_of_experiment(prior(), &pi), Err(Error::ZeroProbabilitySignal(1)));
    }

    #[test]
    fn shape_checks() {
        assert!(Experiment::new(vec![vec![0.5, 0.6]]).is_err());
        let a = Experiment::new(vec![vec![0.2, 0.3, 0.5], vec![1.0, 0.0, 0.0]]).unwrap();
        assert!(matches!(a.compose(&Experiment::identity(2)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn round_trip_through_outcome() {
        let o = outcome_at(0.25, 1.0, 0.6).unwrap();
        let back = outcome_of_experiment(prior(), &Experiment::from_outcome(&o)).unwrap();
        assert!(back.approx_eq(&o, 1e-12));
    }
}
