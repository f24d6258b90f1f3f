use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use persuasion_core::agents::{AgentSpec, HierarchySpec, TableUtility};
use persuasion_core::binary_solver::solve_binary;
use persuasion_core::exec::Execution;
use persuasion_core::experiment::Experiment;
use persuasion_core::gen::random_binary_hierarchy;
use persuasion_core::oracle::{build_grid, monte_carlo, solve_spe_batch, GridGame};
use persuasion_core::outcome::Prior;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn conf(mu: f64) -> AgentSpec {
    AgentSpec::table(format!("conf{mu}"), TableUtility::quadratic_loss(2.0 * mu - 1.0))
}

fn contr(mu: f64) -> AgentSpec {
    AgentSpec::table(format!("contr{mu}"), TableUtility::mismatch_reward(2.0 * mu - 1.0))
}

fn chain() -> HierarchySpec {
    HierarchySpec::new(Prior::binary(0.6).unwrap(), vec![contr(0.1), conf(0.25), conf(0.3), conf(0.7)], conf(0.4)).unwrap()
}

fn grid_game(c: &mut Criterion) {
    let h = chain();
    let mut group = c.benchmark_group("grid_game");
    for g in [100, 200] {
        let grid = build_grid(h.prior, g).unwrap();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, g), &grid, |b, grid| {
                b.iter(|| GridGame::binary(&h, grid, exec).unwrap().spe())
            });
        }
    }
    group.finish();
}

fn spe_batch(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let hs: Vec<_> = (0..32).map(|_| random_binary_hierarchy(&mut rng, 5, 0.1)).collect();
    let grid = build_grid(Prior::binary(0.5).unwrap(), 40).unwrap();
    // One grid serves the batch, so rebuild every draw on p = 0.5 and drop threshold collisions.
    let hs: Vec<_> = hs
        .into_iter()
        .filter_map(|h| HierarchySpec::new(Prior::binary(0.5).unwrap(), h.senders, h.receiver).ok())
        .collect();
    let mut group = c.benchmark_group("spe_batch");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| solve_spe_batch(&hs, &grid, exec)));
    }
    group.finish();
}

fn simulation(c: &mut Criterion) {
    let h = chain();
    let eq = solve_binary(&h).unwrap();
    let first = Experiment::from_outcome(&eq.support);
    let mut exps = vec![first.clone()];
    exps.extend((1..h.n()).map(|_| Experiment::identity(first.cols())));
    let mut group = c.benchmark_group("monte_carlo");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| monte_carlo(&h, &exps, 200_000, Some(7), exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, grid_game, spe_batch, simulation);
criterion_main!(benches);
