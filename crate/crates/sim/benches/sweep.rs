use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use casku::par::Execution;
use casku_sim::sweep::{self, SweepParam};
use casku_sim::ScenarioConfig;

fn sweep_exec(c: &mut Criterion) {
    let base = ScenarioConfig::default();
    let pts = sweep::points(&base, SweepParam::NNuav, &[3, 4, 5, 6, 7], &[true, false]);
    let mut g = c.benchmark_group("n_nuav sweep");
    g.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| sweep::run(pts.clone(), exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, sweep_exec);
criterion_main!(benches);
