use std::cmp::Ordering;

use super::grid::OutcomeGrid;
use super::scalar::{integer_scaled, Scalar};
use crate::agents::Action;
use crate::exec::Execution;

const NONE: usize = usize::MAX;
const MAX_PARAM_DEN: i128 = 10_000;
const MAX_PARAM_ABS: i128 = 1_000_000_000_000;

/// Payoff of one agent at posterior coordinate `c` under action `a`: `k[a] + s[a] * c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Line {
    pub k: [f64; 2],
    pub s: [f64; 2],
}

impl Line {
    fn coefs(&self) -> [f64; 4] {
        [self.k[0], self.s[0], self.k[1], self.s[1]]
    }

    fn magnitude(&self) -> f64 {
        1.0 + self.coefs().iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Grid game in one arithmetic: receiver actions per coordinate and every agent's
/// value at every pair. Agents are the senders in order, then the receiver.
pub(crate) struct Engine<S: Scalar> {
    anchor: usize,
    upper: usize,
    pub act: Vec<Action>,
    vals: Vec<Vec<S::Value>>,
    /// Divides a raw value into a utility.
    scale: Vec<f64>,
    pub feasible: Vec<bool>,
}

pub(crate) struct Level {
    pub player: usize,
    /// Best response inside each pair's garblings, restricted to the next level's set.
    pub args: Vec<usize>,
    pub members: Vec<bool>,
}

pub(crate) struct ChainData {
    /// Players `n` down to 2.
    pub levels: Vec<Level>,
    pub tilde: Vec<bool>,
}

impl ChainData {
    pub fn level(&self, player: usize) -> Option<&Level> {
        self.levels.iter().find(|l| l.player == player)
    }
}

fn assemble<S: Scalar>(
    grid: &OutcomeGrid,
    x: &[S],
    denom: S,
    lines: &[[S; 4]],
    tolerance: &[f64],
    scale: Vec<f64>,
    feasible: Vec<bool>,
    exec: Execution,
) -> Engine<S> {
    let gain = |line: &[S; 4], c: S| (line[2] - line[0]) * denom + (line[3] - line[1]) * c;
    let receiver = lines.len() - 1;
    let last_sender = receiver.saturating_sub(1);
    let act: Vec<Action> = x
        .iter()
        .map(|&c| match gain(&lines[receiver], c).sign(tolerance[receiver]) {
            Ordering::Greater => Action::One,
            Ordering::Less => Action::Zero,
            Ordering::Equal => {
                Action::from_bool(gain(&lines[last_sender], c).sign(tolerance[last_sender]) != Ordering::Less)
            }
        })
        .collect();
    let pay: Vec<Vec<S>> = lines
        .iter()
        .map(|line| {
            x.iter()
                .zip(&act)
                .map(|(&c, a)| if a.is_one() { line[2] * denom + line[3] * c } else { line[0] * denom + line[1] * c })
                .collect()
        })
        .collect();
    let a = grid.anchor_index();
    let upper = grid.upper_len();
    let pairs = grid.pair_count();
    let vals = pay
        .iter()
        .map(|p| {
            exec.map_range(pairs, |idx| {
                let (l, u) = (idx / upper, idx % upper + a);
                if l == a || u == a {
                    S::ratio(p[a], S::one())
                } else {
                    S::ratio((x[u] - x[a]) * p[l] + (x[a] - x[l]) * p[u], x[u] - x[l])
                }
            })
        })
        .collect();
    Engine { anchor: a, upper, act, vals, scale, feasible }
}

pub(crate) fn float_engine(grid: &OutcomeGrid, lines: &[Line], feasible: Vec<bool>, exec: Execution) -> Engine<f64> {
    let coefs: Vec<[f64; 4]> = lines.iter().map(Line::coefs).collect();
    let tol: Vec<f64> = lines.iter().map(Line::magnitude).collect();
    let scale = vec![1.0; lines.len()];
    assemble(grid, grid.coords(), 1.0, &coefs, &tol, scale, feasible, exec)
}

/// Exact engine, if the grid and every payoff coefficient are modest rationals.
pub(crate) fn exact_engine(
    grid: &OutcomeGrid,
    lines: &[Line],
    feasible: Vec<bool>,
    exec: Execution,
) -> Option<Engine<i128>> {
    let (x, denom) = grid.exact_coords()?;
    let mut coefs = Vec::with_capacity(lines.len());
    let mut scale = Vec::with_capacity(lines.len());
    for line in lines {
        let (ints, s) = integer_scaled(&line.coefs(), MAX_PARAM_DEN, MAX_PARAM_ABS)?;
        coefs.push([ints[0], ints[1], ints[2], ints[3]]);
        scale.push(s as f64 * denom as f64);
    }
    let tol = vec![0.0; lines.len()];
    Some(assemble(grid, x, denom, &coefs, &tol, scale, feasible, exec))
}

impl<S: Scalar> Engine<S> {
    fn index(&self, l: usize, u: usize) -> usize {
        l * self.upper + (u - self.anchor)
    }

    fn pair(&self, idx: usize) -> (usize, usize) {
        (idx / self.upper, idx % self.upper + self.anchor)
    }

    fn len(&self) -> usize {
        self.vals[0].len()
    }

    pub fn agents(&self) -> usize {
        self.vals.len()
    }

    pub fn value(&self, agent: usize, idx: usize) -> f64 {
        S::value_f64(&self.vals[agent][idx]) / self.scale[agent]
    }

    fn cmp(&self, agent: usize, a: usize, b: usize) -> Ordering {
        S::compare(&self.vals[agent][a], &self.vals[agent][b])
    }

    /// For each pair, the allowed garbling that maximizes `agent`'s value; ties keep the pair itself.
    fn prefix_argmax(&self, agent: usize, allowed: &[bool]) -> Vec<usize> {
        let mut arg = vec![NONE; self.len()];
        let last = self.anchor + self.upper - 1;
        for l in (0..=self.anchor).rev() {
            for u in self.anchor..=last {
                let id = self.index(l, u);
                let mut best = if allowed[id] { id } else { NONE };
                let neighbours = [
                    (l < self.anchor).then(|| arg[self.index(l + 1, u)]),
                    (u > self.anchor).then(|| arg[self.index(l, u - 1)]),
                ];
                for cand in neighbours.into_iter().flatten() {
                    if cand == NONE {
                        continue;
                    }
                    if best == NONE || self.cmp(agent, cand, best) == Ordering::Greater {
                        best = cand;
                    }
                }
                arg[id] = best;
            }
        }
        arg
    }

    /// Levels `n` down to 2 and the unconstrained set, for `n` senders.
    pub fn chain(&self, n: usize) -> ChainData {
        let mut levels = Vec::new();
        let mut allowed = self.feasible.clone();
        let mut tilde = self.feasible.clone();
        for player in (2..=n).rev() {
            let agent = player - 1;
            let args = self.prefix_argmax(agent, &allowed);
            let members: Vec<bool> = (0..self.len())
                .map(|id| allowed[id] && args[id] != NONE && self.cmp(agent, id, args[id]) != Ordering::Less)
                .collect();
            let free = self.prefix_argmax(agent, &self.feasible);
            for id in 0..self.len() {
                tilde[id] = tilde[id] && free[id] != NONE && self.cmp(agent, id, free[id]) != Ordering::Less;
            }
            allowed = members.clone();
            levels.push(Level { player, args, members });
        }
        ChainData { levels, tilde }
    }

    pub fn top_set<'a>(&'a self, data: &'a ChainData) -> &'a [bool] {
        data.levels.last().map_or(&self.feasible, |l| &l.members)
    }

    pub fn receiver_is_extremist(&self) -> bool {
        self.act.first() == self.act.last()
    }

    /// Canonical representative: pairs the receiver cannot tell apart collapse to `{p}`.
    pub fn key(&self, idx: usize) -> usize {
        let (l, u) = self.pair(idx);
        let degenerate = self.index(self.anchor, self.anchor);
        if l == self.anchor || u == self.anchor || (!self.receiver_is_extremist() && self.act[l] == self.act[u]) {
            degenerate
        } else {
            idx
        }
    }

    /// Player 1's maximizers over the top set, canonicalized, without garblings of other maximizers.
    pub fn spe(&self, data: &ChainData) -> Vec<usize> {
        let top = self.top_set(data);
        let cands: Vec<usize> = (0..self.len()).filter(|&i| top[i]).collect();
        let Some(&first) = cands.first() else { return Vec::new() };
        let best = cands.iter().copied().fold(first, |b, i| if self.cmp(0, i, b) == Ordering::Greater { i } else { b });
        let mut keys: Vec<usize> =
            cands.into_iter().filter(|&i| self.cmp(0, i, best) == Ordering::Equal).map(|i| self.key(i)).collect();
        keys.sort_unstable();
        keys.dedup();
        let contained = |a: usize, b: usize| {
            let ((la, ua), (lb, ub)) = (self.pair(a), self.pair(b));
            lb <= la && ua <= ub
        };
        keys.iter().copied().filter(|&k| !keys.iter().any(|&o| o != k && contained(k, o))).collect()
    }

    /// True when no sender 2..n gains by garbling `eq`, given successors' best responses.
    pub fn deviation_free(&self, data: &ChainData, n: usize, eq: usize) -> bool {
        let (le, ue) = self.pair(eq);
        for player in 2..=n {
            let agent = player - 1;
            let next = data.level(player + 1);
            for l in le..=self.anchor {
                for u in self.anchor..=ue {
                    let id = self.index(l, u);
                    if !self.feasible[id] {
                        continue;
                    }
                    let induced = next.map_or(id, |lv| lv.args[id]);
                    if induced != NONE && self.cmp(agent, induced, eq) == Ordering::Greater {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Feasible pairs that make every agent weakly better off than `eq` and someone strictly.
    pub fn dominators(&self, eq: usize) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.len())
            .filter(|&d| self.feasible[d])
            .filter(|&d| {
                let mut strict = false;
                for agent in 0..self.agents() {
                    match self.cmp(agent, d, eq) {
                        Ordering::Less => return false,
                        Ordering::Greater => strict = true,
                        Ordering::Equal => {}
                    }
                }
                strict
            })
            .map(|d| self.key(d))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// V at each pair for a level: the value of the level's best response.
    pub fn level_values(&self, level: &Level) -> Vec<f64> {
        level.args.iter().map(|&a| if a == NONE { f64::NEG_INFINITY } else { self.value(level.player - 1, a) }).collect()
    }
}
