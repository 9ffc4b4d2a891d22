use std::hint::black_box;

use arank_bench::{identity, random_tensor};
use arank_core::{Budget, Engine};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn engines(c: &mut Criterion) {
    let mut group = c.benchmark_group("bias");
    let cases = [
        ("random_2_3_3", random_tensor(2, 3, 3, 1)),
        ("random_3_2_3", random_tensor(3, 2, 3, 1)),
        ("random_2_2_4", random_tensor(2, 2, 4, 1)),
        ("identity_2_5_3", identity(2, 5, 3)),
    ];
    for (name, t) in &cases {
        for engine in Engine::ALL {
            group.bench_with_input(BenchmarkId::new(engine.name(), name), t, |b, t| {
                b.iter(|| engine.run(black_box(t), Budget::DEFAULT).unwrap())
            });
        }
    }
    group.finish();
}

fn recursive_identity(c: &mut Criterion) {
    let mut group = c.benchmark_group("recursive_identity");
    group.sample_size(10);
    for n in [4usize, 6] {
        let t = identity(3, n, 4);
        group.bench_with_input(BenchmarkId::from_parameter(n), &t, |b, t| {
            b.iter(|| Engine::Recursive.run(black_box(t), Budget::DEFAULT).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, engines, recursive_identity);
criterion_main!(benches);
