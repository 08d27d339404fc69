use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hartmann_gup::report;
use hartmann_gup::{Execution, RunConfig};

fn config(text: &str) -> RunConfig {
    RunConfig::parse(text, Vec::new()).expect("bench config")
}

fn sweeps(c: &mut Criterion) {
    let matel = config("q = 2.0\nmax_level = 3\nmax_m = 2\nt_max = 2\n");
    let splitting = config("q = 8.0\nbeta = 1e-4\nmax_level = 4\nmax_m = 2\n");
    let verify = config("q = 8.0\n");

    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_with_input(BenchmarkId::new("matel", name), &exec, |b, e| {
            b.iter(|| black_box(report::matel(&matel, *e).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("splitting", name), &exec, |b, e| {
            b.iter(|| black_box(report::splitting(&splitting, *e).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("verify", name), &exec, |b, e| {
            b.iter(|| black_box(report::verify(&verify, *e).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
