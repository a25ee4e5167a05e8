use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use localdisc::{
    beta_two_way_upper, build_optimal_separable_povm, build_two_way_t, simulate_protocol,
    DeltaMatrix, OptimizerConfig, Source,
};
use localdisc_bench::sample_spectrum;

fn optimizer(c: &mut Criterion) {
    let config = OptimizerConfig::default();
    for d in [2usize, 3, 4] {
        let s = sample_spectrum(d);
        c.bench_function(&format!("beta_two_way_upper d={d}"), |b| {
            b.iter(|| beta_two_way_upper(black_box(&s), d * d, &config).unwrap())
        });
    }
}

fn separable(c: &mut Criterion) {
    for d in [2usize, 4, 6] {
        let s = sample_spectrum(d);
        c.bench_function(&format!("separable povm with certificates d={d}"), |b| {
            b.iter(|| build_optimal_separable_povm(black_box(&s)))
        });
    }
}

fn two_way(c: &mut Criterion) {
    let s = sample_spectrum(3);
    let delta = DeltaMatrix::uniform(3);
    c.bench_function("build_two_way_t d=3", |b| {
        b.iter(|| build_two_way_t(black_box(&s), &delta).unwrap())
    });
    let (_, protocol) = build_two_way_t(&s, &delta).unwrap();
    c.bench_function("simulate 10k mixed samples d=3", |b| {
        b.iter(|| simulate_protocol(&protocol, Source::Mixed, 10_000, 0).unwrap())
    });
}

criterion_group!(benches, optimizer, separable, two_way);
criterion_main!(benches);
