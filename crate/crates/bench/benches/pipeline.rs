use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use twshield::automaton::compile;
use twshield::experiment::{ExperimentConfig, Mode, Pipeline};
use twshield::gridworld::{build_grid_mdp, canonical_case_study};
use twshield::learner::learn;
use twshield::product::build_product;
use twshield::reachability::{
    multi_shot_prune, one_shot_prune, solve_kappa, IntervalDistributionProblem, MultiShotPlan,
};
use twshield::LearnerConfig;

fn construction(c: &mut Criterion) {
    let (grid, formula) = canonical_case_study();
    let mdp = build_grid_mdp(&grid).unwrap();
    let aut = compile(&formula, &grid.propositions).unwrap();
    let horizon = formula.time_bound() as usize;

    c.bench_function("compile_delivery_task", |b| {
        b.iter(|| compile(black_box(&formula), &grid.propositions).unwrap())
    });
    c.bench_function("build_product", |b| {
        b.iter(|| build_product(&mdp, &aut, black_box(horizon)).unwrap())
    });
}

fn pruning(c: &mut Criterion) {
    let (grid, formula) = canonical_case_study();
    let mdp = build_grid_mdp(&grid).unwrap();
    let aut = compile(&formula, &grid.propositions).unwrap();
    let prod = build_product(&mdp, &aut, formula.time_bound() as usize).unwrap();
    let plan = MultiShotPlan::uniform(vec![0, 8, 15, 22, 35], 0.9).unwrap();

    c.bench_function("one_shot_prune", |b| {
        b.iter(|| one_shot_prune(&prod, black_box(0.9)).unwrap())
    });
    c.bench_function("multi_shot_prune", |b| {
        b.iter(|| multi_shot_prune(&prod, black_box(&plan)).unwrap())
    });

    let prob = IntervalDistributionProblem::new(
        vec![0.9, 0.1, 0.5, 0.7, 0.3, 1.0, 0.0, 0.6, 0.2],
        vec![0.92, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        vec![1.0, 0.01, 0.01, 0.01, 0.01, 0.01, 0.01, 0.01, 0.01],
    );
    c.bench_function("solve_kappa_9", |b| {
        b.iter(|| solve_kappa(black_box(&prob)).unwrap())
    });
}

fn learning(c: &mut Criterion) {
    let mut group = c.benchmark_group("learn_1000_episodes");
    group.sample_size(20);
    for mode in [Mode::OneShot, Mode::MultiShot] {
        let cfg = ExperimentConfig {
            mode,
            pr_des: 0.7,
            ..ExperimentConfig::default()
        };
        let p = Pipeline::prepare(&cfg).unwrap();
        let start = p.start_state(cfg.start).unwrap();
        let learner = LearnerConfig {
            episodes: 1000,
            ..LearnerConfig::default()
        };
        group.bench_function(mode.name(), |b| {
            b.iter_batched(
                || learner.clone(),
                |l| learn(&p.product, &p.shield, &p.mdp, start, &l, true).unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, construction, pruning, learning);
criterion_main!(benches);
