mod common;

use common::*;
use persuasion_core::advisor::optimal_vp_binary_with;
use persuasion_core::agents::{Kind, LinearUtility, TableUtility};
use persuasion_core::binary_solver::solve_binary;
use persuasion_core::exec::Execution;
use persuasion_core::experiment::Experiment;
use persuasion_core::gen::{binary_agent, random_binary_hierarchy, random_general_hierarchy};
use persuasion_core::general_solver::{player1_value, solve_general_uniform};
use persuasion_core::oracle::{monte_carlo, monte_carlo_general};
use persuasion_core::outcome::{outcome_at, BinaryOutcome};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn row() -> impl Strategy<Value = Vec<f64>> {
    (0.0f64..=1.0).prop_map(|a| vec![1.0 - a, a])
}

fn experiment() -> impl Strategy<Value = Experiment> {
    (row(), row()).prop_map(|(a, b)| Experiment::new(vec![a, b]).unwrap())
}

fn outcome(p: f64) -> impl Strategy<Value = BinaryOutcome> {
    (0.0..=p, p..=1.0).prop_map(move |(q0, q1)| outcome_at(q0, q1, p).unwrap())
}

fn dyadic() -> impl Strategy<Value = f64> {
    (-256i32..=256).prop_map(|k| f64::from(k) / 64.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gamma_levels_nest_on_binary_chains(seed in any::<u64>(), g in prop::sample::select(vec![20u32, 40])) {
        let h = random_binary_hierarchy(&mut rng(seed), 4, 0.1);
        let chain = chain_of(&h, g);
        prop_assert!(nesting(&chain, h.n()).is_ok(), "{:?}", nesting(&chain, h.n()));
    }

    #[test]
    fn gamma_levels_nest_on_uniform_chains(seed in any::<u64>()) {
        let h = random_general_hierarchy(&mut rng(seed), 4, false);
        let chain = chain_of(&h, 20);
        prop_assert!(nesting(&chain, h.n()).is_ok(), "{:?}", nesting(&chain, h.n()));
    }

    #[test]
    fn receiver_gain_falls_as_the_appended_threshold_rises(seed in any::<u64>()) {
        let h = random_binary_hierarchy(&mut rng(seed), 5, 0.0);
        let interval = optimal_vp_binary_with(&h, None).ok().and_then(|r| r.specs[0].interval);
        if let Some((lo, hi)) = interval {
            let len = hi - lo;
            let mut last = f64::INFINITY;
            for k in 1..=5 {
                let r = optimal_vp_binary_with(&h, Some(len * f64::from(k) / 6.0)).unwrap();
                let v = r.after.receiver_value();
                prop_assert!(v <= last + 1e-12, "offset {k}/6: {v} > {last}");
                last = v;
            }
        }
    }
}

proptest! {
    #[test]
    fn mpc_is_a_partial_order(
        (a, b, c) in (0.05f64..0.95).prop_flat_map(|p| (outcome(p), outcome(p), outcome(p)))
    ) {
        prop_assert!(mpc_laws(&a, &b, &c).is_ok(), "{:?}", mpc_laws(&a, &b, &c));
        prop_assert!(mpc_laws(&a, &a, &b).is_ok(), "{:?}", mpc_laws(&a, &a, &b));
    }

    #[test]
    fn constructed_outcomes_are_bayes_plausible(p in 0.01f64..0.99, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let o = outcome_at(a * p, p + b * (1.0 - p), p).unwrap();
        prop_assert!(o.plausibility_gap().abs() <= 1e-12);
        prop_assert!((o.w0 + o.w1 - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn garbling_never_adds_information(p in 0.05f64..0.95, first in experiment(), second in experiment()) {
        prop_assert!(composition_garbles(p, &first, &second).is_ok(), "{:?}", composition_garbles(p, &first, &second));
    }

    #[test]
    fn indifference_belief_is_affine_invariant_bitwise(
        u00 in dyadic(), u10 in dyadic(), u01 in dyadic(), u11 in dyadic(),
        k in 0i32..6, shift in dyadic(),
    ) {
        let u = TableUtility::new(u00, u10, u01, u11);
        let check = affine_invariance(&u, 2f64.powi(k), shift, true);
        prop_assert!(check.is_ok(), "{:?}", check);
    }

    #[test]
    fn indifference_belief_is_affine_invariant(
        u in (-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0),
        scale in 0.01f64..100.0, shift in -10.0f64..10.0,
    ) {
        let t = TableUtility::new(u.0, u.1, u.2, u.3);
        let den = (t.u00 - t.u01) + (t.u11 - t.u10);
        prop_assume!(den.abs() > 1e-3);
        let check = affine_invariance(&t, scale, shift, false);
        prop_assert!(check.is_ok(), "{:?}", check);
    }

    #[test]
    fn expected_value_slopes_follow_preferences(
        seed in any::<u64>(),
        kind in prop::sample::select(vec![Kind::Conformist, Kind::Contrarian]),
        mu in 0.02f64..0.98,
        p in 0.1f64..0.9,
        r in 0.0f64..1.0,
        a in 0.0f64..1.0,
        b in 0.0f64..1.0,
    ) {
        let mu_r = 0.01 + 0.98 * r * p;
        let q0 = a * (mu_r.min(p) - 2e-5);
        let q1 = p.max(mu_r) + 2e-5 + b * (1.0 - p.max(mu_r) - 4e-5);
        let agent = binary_agent(&mut rng(seed), "a".into(), kind, mu).utility.table();
        prop_assume!(agent.gain_of_one(q0).abs() > 1e-4 && agent.gain_of_one(q1).abs() > 1e-4);
        prop_assume!(q0 > 2e-6 && q1 < 1.0 - 2e-6);
        let check = finite_difference_signs(&agent, mu_r, p, q0, q1);
        prop_assert!(check.is_ok(), "{:?}", check);
    }

    #[test]
    fn case_b_and_c_meet_continuously(
        omega_p in 0.05f64..0.45,
        a in 0.0f64..1.0,
        b in 0.0f64..1.0,
        eps in prop::sample::select(vec![1e-3, 1e-6]),
    ) {
        let omega1 = omega_p + 0.01 + a * (0.98 - omega_p);
        let omega_r = omega_p + 0.01 + b * (0.48 - omega_p);
        prop_assume!((omega1 - (omega_p + 0.5)).abs() > 2e-3);
        let check = boundary_continuity(omega1, omega_p, omega_r, eps);
        prop_assert!(check.is_ok(), "{:?}", check);
    }

    #[test]
    fn player_one_objective_is_stationary_at_half_threshold(alpha in 0.1f64..5.0, omega in 0.02f64..0.98) {
        let u = LinearUtility::new(alpha, -alpha * omega);
        let h = 1e-6;
        let m = 0.5 * omega;
        let d = (player1_value(m + h, &u) - player1_value(m - h, &u)) / (2.0 * h);
        prop_assert!(d.abs() <= 1e-8, "derivative {d}");
    }

    #[test]
    fn lowering_the_pivot_threshold_helps_the_receiver(a in 0.11f64..0.29, b in 0.11f64..0.29) {
        prop_assume!((a - b).abs() > 1e-6);
        let (lo, hi) = (a.min(b), a.max(b));
        let value = |mu: f64| solve_binary(&binary(0.6, vec![contr(0.1), conf(mu), conf(0.3)], conf(0.4))).unwrap().receiver_value();
        prop_assert!(value(lo) >= value(hi) - 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn monte_carlo_is_deterministic(seed in any::<u64>(), trials in 1u64..30_000) {
        let h = pivot_ahead();
        let eq = solve_binary(&h).unwrap();
        let exps = vec![Experiment::from_outcome(&eq.support), Experiment::identity(2), Experiment::identity(2)];
        let a = monte_carlo(&h, &exps, trials, Some(seed), Execution::Sequential).unwrap();
        let b = monte_carlo(&h, &exps, trials, Some(seed), Execution::Parallel).unwrap();
        let c = monte_carlo(&h, &exps, trials, Some(seed), Execution::Parallel).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&b, &c);
        let g = interior_cut();
        let eq = solve_general_uniform(&g).unwrap();
        let x = monte_carlo_general(&g, &eq.support, trials, Some(seed), Execution::Sequential).unwrap();
        let y = monte_carlo_general(&g, &eq.support, trials, Some(seed), Execution::Parallel).unwrap();
        prop_assert_eq!(x, y);
    }
}
