use std::hint::black_box;

use affinity_bench::scaling_fixture;
use affinity_core::affinity::{
    estimate_affinity, observed_information, DEFAULT_LAMBDA, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use affinity_core::diagnostics::influence;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

fn bench_estimate(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimate_affinity");
    for v in [200usize, 2_000, 10_000] {
        let fixture = scaling_fixture(v, 4, 2_000, 1);
        group.throughput(Throughput::Elements(fixture.docs.len() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(v), &fixture, |b, fx| {
            b.iter(|| {
                for x in &fx.docs {
                    let fit = estimate_affinity(
                        &fx.model,
                        x,
                        DEFAULT_LAMBDA,
                        DEFAULT_TOL,
                        DEFAULT_MAX_ITER,
                    )
                    .unwrap();
                    black_box(fit.theta[0]);
                }
            })
        });
    }
    group.finish();
}

fn bench_information(c: &mut Criterion) {
    let fixture = scaling_fixture(2_000, 1, 5_000, 2);
    c.bench_function("observed_information_v2000", |b| {
        b.iter(|| {
            let h = observed_information(
                &fixture.model,
                &fixture.docs[0],
                black_box(&[0.1]),
                DEFAULT_LAMBDA,
            )
            .unwrap();
            black_box(h[(0, 0)]);
        })
    });
}

fn bench_influence(c: &mut Criterion) {
    let fixture = scaling_fixture(2_000, 1, 5_000, 3);
    let x = &fixture.docs[0];
    let fit = estimate_affinity(&fixture.model, x, DEFAULT_LAMBDA, DEFAULT_TOL, DEFAULT_MAX_ITER)
        .unwrap();
    c.bench_function("influence_v2000", |b| {
        b.iter(|| {
            let entries = influence(&fixture.model, x, &fit, DEFAULT_LAMBDA).unwrap();
            black_box(entries.len());
        })
    });
}

criterion_group!(benches, bench_estimate, bench_information, bench_influence);
criterion_main!(benches);
