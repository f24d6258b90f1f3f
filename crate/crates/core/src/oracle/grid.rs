use serde::Serialize;

use super::scalar::{lcm, rationalize};
use crate::error::{Error, Result};
use crate::outcome::{BinaryOutcome, Prior};

const MAX_PRIOR_DEN: i128 = 10_000;
const MAX_COMMON_DEN: i128 = 100_000_000;

/// Posterior pairs `(q0, q1)` with `q0 <= anchor <= q1` on the lattice `k / G`,
/// with the anchor inserted when it is not a lattice point.
///
/// Pairs are indexed `l * upper_len + (u - anchor_index)` where `l` ranges over
/// coordinates up to the anchor and `u` over coordinates from it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeGrid {
    resolution: u32,
    anchor: f64,
    coords: Vec<f64>,
    anchor_index: usize,
    #[serde(skip)]
    exact: Option<(Vec<i128>, i128)>,
}

/// Grid for `prior`; the anchor is `p` for a binary prior and 0.5 for the uniform one.
pub fn build_grid(prior: impl Into<Prior>, g: u32) -> Result<OutcomeGrid> {
    if g < 10 {
        return Err(Error::ResolutionTooCoarse(g));
    }
    Ok(OutcomeGrid::unchecked(prior, g))
}

impl OutcomeGrid {
    /// Same as [`build_grid`] without the minimum-resolution check.
    pub fn unchecked(prior: impl Into<Prior>, g: u32) -> Self {
        let g = g.max(1);
        let anchor = prior.into().anchor();
        let gf = f64::from(g);
        let on_lattice = ((anchor * gf).round() - anchor * gf).abs() <= 1e-9;
        let mut coords: Vec<f64> = (0..=g).map(|k| f64::from(k) / gf).collect();
        let anchor_index = if on_lattice {
            (anchor * gf).round() as usize
        } else {
            let pos = coords.partition_point(|&c| c < anchor);
            coords.insert(pos, anchor);
            pos
        };
        coords[anchor_index] = anchor;

        let exact = rationalize(anchor, MAX_PRIOR_DEN).and_then(|p| {
            let l = lcm(i128::from(g), *p.denom()).filter(|&l| l <= MAX_COMMON_DEN)?;
            let mut xs: Vec<i128> = (0..=i128::from(g)).map(|k| k * (l / i128::from(g))).collect();
            let xp = *p.numer() * (l / *p.denom());
            if !on_lattice {
                xs.insert(anchor_index, xp);
            }
            (xs[anchor_index] == xp).then_some((xs, l))
        });
        Self { resolution: g, anchor, coords, anchor_index, exact }
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn anchor_index(&self) -> usize {
        self.anchor_index
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coord(&self, k: usize) -> f64 {
        self.coords[k]
    }

    /// Integer coordinates and their common denominator, when the anchor is a modest rational.
    pub fn exact_coords(&self) -> Option<(&[i128], i128)> {
        self.exact.as_ref().map(|(x, l)| (x.as_slice(), *l))
    }

    pub fn upper_len(&self) -> usize {
        self.coords.len() - self.anchor_index
    }

    /// Number of raw `(q0, q1)` pairs, degenerate ones included.
    pub fn pair_count(&self) -> usize {
        (self.anchor_index + 1) * self.upper_len()
    }

    pub fn index(&self, l: usize, u: usize) -> usize {
        debug_assert!(l <= self.anchor_index && u >= self.anchor_index);
        l * self.upper_len() + (u - self.anchor_index)
    }

    pub fn pair(&self, idx: usize) -> (usize, usize) {
        (idx / self.upper_len(), idx % self.upper_len() + self.anchor_index)
    }

    pub fn degenerate_index(&self) -> usize {
        self.index(self.anchor_index, self.anchor_index)
    }

    /// True when the pair carries information, i.e. both posteriors differ from the anchor.
    pub fn is_informative(&self, idx: usize) -> bool {
        let (l, u) = self.pair(idx);
        l < self.anchor_index && u > self.anchor_index
    }

    /// Canonical outcome at a pair; pairs touching the anchor collapse to `{p}`.
    pub fn outcome(&self, idx: usize) -> BinaryOutcome {
        if !self.is_informative(idx) {
            return BinaryOutcome::no_info(self.anchor);
        }
        let (l, u) = self.pair(idx);
        let (q0, q1) = (self.coords[l], self.coords[u]);
        let w1 = (self.anchor - q0) / (q1 - q0);
        BinaryOutcome { q0, q1, p: self.anchor, w0: 1.0 - w1, w1 }
    }

    /// Coordinate index of `q`, if it is a grid point.
    pub fn locate(&self, q: f64) -> Option<usize> {
        let tol = 1e-9;
        let pos = self.coords.partition_point(|&c| c < q - tol);
        (pos < self.coords.len() && (self.coords[pos] - q).abs() <= tol).then_some(pos)
    }

    /// Pair index of an outcome whose posteriors lie on the grid.
    pub fn snap(&self, out: &BinaryOutcome) -> Result<usize> {
        if out.is_degenerate() {
            return Ok(self.degenerate_index());
        }
        match (self.locate(out.q0), self.locate(out.q1)) {
            (Some(l), Some(u)) if l <= self.anchor_index && u >= self.anchor_index => Ok(self.index(l, u)),
            _ => Err(Error::OffGrid { q0: out.q0, q1: out.q1 }),
        }
    }

    /// Distinct canonical outcomes: every informative pair plus `{p}`.
    pub fn points(&self) -> Vec<BinaryOutcome> {
        std::iter::once(self.degenerate_index())
            .chain((0..self.pair_count()).filter(|&i| self.is_informative(i)))
            .map(|i| self.outcome(i))
            .collect()
    }

    /// Whether pair `a` is a garbling of pair `b` (componentwise containment).
    pub fn contained(&self, a: usize, b: usize) -> bool {
        let ((la, ua), (lb, ub)) = (self.pair(a), self.pair(b));
        lb <= la && ua <= ub
    }
}
