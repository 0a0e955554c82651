use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use siglearn::compat::{is_more_compatible, CompatibilityQuery};
use siglearn::fixtures::{beer_quiche, BEER, STRONG, WEAK};
use siglearn::gittins::{clear_index_cache, gittins_index, DirichletArm};
use siglearn::sender::asr_exact;

fn gittins(c: &mut Criterion) {
    let g = beer_quiche();
    let arm = DirichletArm::with_counts(vec![1.0, 1.0], vec![3, 5]).unwrap();
    for beta in [0.9, 0.99] {
        c.bench_function(&format!("gittins_index beta={beta}"), |b| {
            b.iter(|| {
                clear_index_cache();
                gittins_index(&g, STRONG, BEER, black_box(&arm), beta, 1e-6).unwrap()
            })
        });
    }
}

fn compat(c: &mut Criterion) {
    let g = beer_quiche();
    let q = CompatibilityQuery { theta_hi: STRONG, theta_lo: WEAK, signal: BEER };
    c.bench_function("is_more_compatible", |b| b.iter(|| is_more_compatible(&g, black_box(&q)).unwrap()));
}

fn asr(c: &mut Criterion) {
    let g = beer_quiche();
    let alpha = vec![vec![1.0; 2]; 2];
    let pi2 = vec![vec![0.3, 0.7], vec![0.6, 0.4]];
    let mut group = c.benchmark_group("asr_exact");
    group.sample_size(10);
    group.bench_function("gamma=0.9", |b| {
        b.iter(|| asr_exact(&g, WEAK, black_box(&pi2), &alpha, 0.9, 0.9, 1e-12, 1e-9).unwrap())
    });
    group.finish();
}

criterion_group!(benches, gittins, compat, asr);
criterion_main!(benches);
