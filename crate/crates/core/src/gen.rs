//! Random hierarchies for property tests, acceptance runs and benchmarks.
//!
//! Thresholds sit on the 1/100 lattice and payoff coefficients are small
//! rationals, so the grid oracle runs in exact arithmetic on every instance.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::agents::{AgentSpec, HierarchySpec, Kind, LinearUtility, TableUtility};
use crate::outcome::Prior;

const SCALES: [f64; 4] = [0.5, 1.0, 2.0, 4.0];
const OFFSETS: [f64; 5] = [-1.0, -0.5, 0.0, 0.25, 1.0];

pub const KINDS: [Kind; 4] = [Kind::Conformist, Kind::Contrarian, Kind::ZeroExtremist, Kind::OneExtremist];

fn lattice(rng: &mut impl Rng, lo: u32, hi: u32) -> f64 {
    f64::from(rng.random_range(lo..=hi)) / 100.0
}

/// Table whose gain from action 1 is `(1 - q) * d0 + q * d1`, with random per-state offsets.
fn table_from_gains(rng: &mut impl Rng, d0: f64, d1: f64) -> TableUtility {
    let u00 = *OFFSETS.choose(rng).unwrap();
    let u10 = *OFFSETS.choose(rng).unwrap();
    TableUtility::new(u00, u10, u00 + d0, u10 + d1)
}

/// Binary-state agent of `kind`; `mu` is ignored for extremists.
pub fn binary_agent(rng: &mut impl Rng, label: String, kind: Kind, mu: f64) -> AgentSpec {
    let c = *SCALES.choose(rng).unwrap();
    let (d0, d1) = match kind {
        Kind::Conformist => (-c * mu, c * (1.0 - mu)),
        Kind::Contrarian => (c * mu, -c * (1.0 - mu)),
        Kind::ZeroExtremist => (-c, -c * (0.5 + f64::from(rng.random_range(0..4u8)) * 0.5)),
        Kind::OneExtremist => (c, c * (0.5 + f64::from(rng.random_range(0..4u8)) * 0.5)),
    };
    let (d0, d1) = if (d0 - d1).abs() < 1e-12 { (d0, 2.0 * d1) } else { (d0, d1) };
    AgentSpec::table(label, table_from_gains(rng, d0, d1))
}

fn distinct_thresholds(rng: &mut impl Rng, count: usize, avoid: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(count);
    while out.len() < count {
        let t = lattice(rng, 2, 98);
        if (t - avoid).abs() > 1e-9 && out.iter().all(|&o| (o - t).abs() > 1e-9) {
            out.push(t);
        }
    }
    out
}

/// Binary-state hierarchy with up to `max_n` senders of any kind. The receiver is
/// an extremist with probability `extremist_receiver`, otherwise a conformist or contrarian.
pub fn random_binary_hierarchy(rng: &mut impl Rng, max_n: usize, extremist_receiver: f64) -> HierarchySpec {
    loop {
        let p = lattice(rng, 10, 90);
        let n = rng.random_range(1..=max_n);
        let thresholds = distinct_thresholds(rng, n + 1, p);
        let senders = (0..n)
            .map(|i| {
                let kind = *KINDS.choose(rng).unwrap();
                binary_agent(rng, format!("s{}", i + 1), kind, thresholds[i])
            })
            .collect();
        let receiver_kind = if rng.random_bool(extremist_receiver) {
            *KINDS[2..].choose(rng).unwrap()
        } else {
            *KINDS[..2].choose(rng).unwrap()
        };
        let receiver = binary_agent(rng, "r".into(), receiver_kind, thresholds[n]);
        if let Ok(h) = HierarchySpec::new(Prior::binary(p).expect("interior prior"), senders, receiver) {
            return h;
        }
    }
}

/// Linear agent of `kind` under the uniform prior.
pub fn linear_agent(rng: &mut impl Rng, label: String, kind: Kind, omega: f64) -> AgentSpec {
    let a = *SCALES.choose(rng).unwrap();
    let lin = match kind {
        Kind::Conformist => LinearUtility::new(a, -a * omega),
        Kind::Contrarian => LinearUtility::new(-a, a * omega),
        Kind::ZeroExtremist => LinearUtility::new(a, -a * (1.0 + lattice(rng, 5, 50))),
        Kind::OneExtremist => LinearUtility::new(a, a * lattice(rng, 5, 50)),
    };
    AgentSpec::linear(label, lin)
}

/// Uniform-prior hierarchy with a non-extremist receiver. With `all_conformist`
/// every agent is a conformist; otherwise sender kinds are drawn uniformly.
pub fn random_general_hierarchy(rng: &mut impl Rng, max_n: usize, all_conformist: bool) -> HierarchySpec {
    loop {
        let n = rng.random_range(1..=max_n);
        let thresholds = distinct_thresholds(rng, n + 1, 0.5);
        let senders = (0..n)
            .map(|i| {
                let kind = if all_conformist { Kind::Conformist } else { *KINDS.choose(rng).unwrap() };
                linear_agent(rng, format!("s{}", i + 1), kind, thresholds[i])
            })
            .collect();
        let receiver_kind = if all_conformist { Kind::Conformist } else { *KINDS[..2].choose(rng).unwrap() };
        let receiver = linear_agent(rng, "r".into(), receiver_kind, thresholds[n]);
        if let Ok(h) = HierarchySpec::new(Prior::Uniform, senders, receiver) {
            return h;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_agents_have_the_requested_kind() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kind in KINDS {
            for _ in 0..20 {
                let mu = lattice(&mut rng, 2, 98);
                if mu == 0.5 {
                    continue;
                }
                let a = binary_agent(&mut rng, "a".into(), kind, mu);
                let c = a.classify(Prior::binary(0.5).unwrap()).unwrap();
                assert_eq!(c.kind, kind);
                if !kind.is_extremist() {
                    assert!((c.mu() - mu).abs() < 1e-12);
                }
                let l = linear_agent(&mut rng, "l".into(), kind, mu);
                assert_eq!(l.classify(Prior::Uniform).unwrap().kind, kind);
            }
        }
    }

    #[test]
    fn hierarchies_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let h = random_binary_hierarchy(&mut rng, 5, 0.1);
            assert!(h.n() >= 1 && h.n() <= 5);
            let g = random_general_hierarchy(&mut rng, 4, false);
            assert!(g.prior.is_uniform());
        }
    }
}
