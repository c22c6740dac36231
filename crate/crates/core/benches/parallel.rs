use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use occtrack::experiment::{run_highway, run_highway_seeds, HighwayExperiment};
use occtrack::occlusion::StrategyKind;
use occtrack::par::ExecMode;

const MODES: [(&str, ExecMode); 2] = [
    ("sequential", ExecMode::Sequential),
    ("parallel", ExecMode::Parallel),
];

fn short_run() -> HighwayExperiment {
    HighwayExperiment {
        steps: 20,
        strategies: vec![StrategyKind::OwoExpval, StrategyKind::Mwo],
        ..HighwayExperiment::default()
    }
}

fn single_run(c: &mut Criterion) {
    let exp = short_run();
    let mut g = c.benchmark_group("highway_steps");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, m| {
            b.iter(|| run_highway(&exp, *m).unwrap())
        });
    }
    g.finish();
}

fn seed_sweep(c: &mut Criterion) {
    let exp = short_run();
    let seeds: Vec<u64> = (0..4).collect();
    let mut g = c.benchmark_group("highway_seeds");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, m| {
            b.iter(|| run_highway_seeds(&exp, &seeds, *m).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, single_run, seed_sweep);
criterion_main!(benches);
