//! Rayon vs sequential timing for the two embarrassingly parallel paths:
//! fluctuation sampling and type-class spectrum enumeration. Outputs are
//! bitwise identical either way, so this measures pure scheduling cost.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use finblock::montecarlo::{sample_fluctuations, sample_fluctuations_seq};
use finblock::spectrum::{type_class_spectrum, type_class_spectrum_seq};
use finblock::{McConfig, SourcePmf};

fn bench_sampling(c: &mut Criterion) {
    let pmf = SourcePmf::new(vec![0.11, 0.89]).unwrap();
    let cfg = McConfig {
        samples: 10_000,
        seed: 42,
        n_grid: vec![],
        max_k: 3,
        alpha: 1.27,
    };
    let mut group = c.benchmark_group("fluctuation_sampling");
    group.sample_size(10);
    for n in [256u64, 1024] {
        group.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, &n| {
            b.iter(|| sample_fluctuations(black_box(&pmf), n, &cfg))
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, &n| {
            b.iter(|| sample_fluctuations_seq(black_box(&pmf), n, &cfg))
        });
    }
    group.finish();
}

fn bench_spectrum(c: &mut Criterion) {
    let pmf = SourcePmf::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
    let mut group = c.benchmark_group("type_class_spectrum");
    group.sample_size(10);
    for n in [40u64, 80] {
        group.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, &n| {
            b.iter(|| type_class_spectrum(black_box(&pmf), n).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, &n| {
            b.iter(|| type_class_spectrum_seq(black_box(&pmf), n).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_sampling, bench_spectrum);
criterion_main!(benches);
