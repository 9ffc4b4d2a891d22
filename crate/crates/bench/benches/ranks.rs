use std::hint::black_box;

use arank_bench::{identity, random_tensor};
use arank_core::ranks::RankSearcher;
use arank_core::{max_independent_set, rank_upper_greedy, Budget, PrimeField, RankKind};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn exact_search(c: &mut Criterion) {
    let mut group = c.benchmark_group("rank_exact");
    let f2 = PrimeField::new(2).unwrap();
    for kind in RankKind::ALL {
        group.bench_function(BenchmarkId::new("build", kind.name()), |b| {
            b.iter(|| RankSearcher::new(f2, 2, 3, kind, Budget::DEFAULT).unwrap())
        });
        let searcher = RankSearcher::new(f2, 2, 3, kind, Budget::DEFAULT).unwrap();
        let t = random_tensor(2, 2, 3, 5);
        group.bench_function(BenchmarkId::new("search", kind.name()), |b| {
            b.iter(|| searcher.report(black_box(&t)).unwrap())
        });
    }
    group.finish();
}

fn greedy_and_independent(c: &mut Criterion) {
    let t = random_tensor(3, 4, 3, 2);
    c.bench_function("greedy_prank_3_4_3", |b| {
        b.iter(|| rank_upper_greedy(black_box(&t), RankKind::Prank).unwrap())
    });
    let id = identity(2, 12, 3);
    c.bench_function("max_independent_set_identity_12", |b| {
        b.iter(|| max_independent_set(black_box(&id)))
    });
}

criterion_group!(benches, exact_search, greedy_and_independent);
criterion_main!(benches);
