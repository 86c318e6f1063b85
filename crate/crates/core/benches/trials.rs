use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dctc_core::cloning::{haar_pure_inputs, CloneRunConfig, Cloner};
use dctc_core::par;
use dctc_core::seed;

fn trials(c: &mut Criterion) {
    let n_trials = 512;
    let inputs = haar_pure_inputs(2, n_trials, 1).unwrap();
    let cloner = Cloner::new(CloneRunConfig::structured(2, 1_000_000, 0)).unwrap();
    let work = |t: usize| cloner.run_seeded(&inputs[t], seed::derive(2, &[t as u64])).unwrap().clone_fidelity;

    let mut group = c.benchmark_group("structured_trials");
    group.bench_with_input(BenchmarkId::new("sequential", n_trials), &n_trials, |b, &n| {
        b.iter(|| par::map_indexed_sequential(n, work))
    });
    #[cfg(feature = "parallel")]
    group.bench_with_input(BenchmarkId::new("parallel", n_trials), &n_trials, |b, &n| {
        b.iter(|| par::map_indexed_parallel(n, work))
    });
    group.finish();
}

criterion_group!(benches, trials);
criterion_main!(benches);
