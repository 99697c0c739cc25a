use std::hint::black_box;

use cfskew_core::expectation::{elementary_symmetric, poisson_binomial_pmf};
use cfskew_core::interactions::generate_synthetic;
use cfskew_core::similarity::{neighborhood_sizes, pairwise_similarity};
use cfskew_core::{Axis, GeneratorConfig, Metric, ZipfModel, ZipfSampler};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand_chacha::rand_core::SeedableRng;

fn pairwise(c: &mut Criterion) {
    let mut group = c.benchmark_group("pairwise_similarity");
    group.sample_size(10);
    for users in [500usize, 2000] {
        let matrix = generate_synthetic(&GeneratorConfig::new(users, 5000, 50, 1.0, 7)).unwrap();
        for axis in [Axis::User, Axis::Item] {
            group.bench_with_input(BenchmarkId::new(axis.as_str(), users), &matrix, |b, m| {
                b.iter(|| pairwise_similarity(m, axis, Metric::Jaccard, None))
            });
        }
    }
    group.finish();

    let matrix = generate_synthetic(&GeneratorConfig::new(2000, 5000, 50, 1.0, 7)).unwrap();
    c.bench_function("neighborhood_sizes/item/2000", |b| {
        b.iter(|| neighborhood_sizes(&matrix, Axis::Item))
    });
}

fn elementary(c: &mut Criterion) {
    let mut group = c.benchmark_group("elementary_symmetric");
    for (m, t) in [(1000usize, 20usize), (10_000, 50), (100_000, 100)] {
        let q: Vec<f64> = (1..=m).map(|i| 1.0 / (i as f64 * i as f64)).collect();
        group.bench_with_input(BenchmarkId::new("dp", format!("{m}x{t}")), &q, |b, q| {
            b.iter(|| elementary_symmetric(black_box(q), t).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("pmf", format!("{m}x{t}")), &q, |b, q| {
            b.iter(|| poisson_binomial_pmf(black_box(q), t))
        });
    }
    group.finish();
}

fn sampler(c: &mut Criterion) {
    let model = ZipfModel::new(1.0, 100_000).unwrap();
    let sampler = ZipfSampler::new(&model);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    c.bench_function("zipf_sample/1e5", |b| b.iter(|| sampler.sample(&mut rng)));
    c.bench_function("zipf_sampler_build/1e5", |b| b.iter(|| ZipfSampler::new(&model)));
}

criterion_group!(benches, pairwise, elementary, sampler);
criterion_main!(benches);
