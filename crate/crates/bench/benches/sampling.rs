use criterion::{black_box, criterion_group, criterion_main, Criterion};

use pitman_core::inference::{fit_eppf, FitBox, SpeciesSample};
use pitman_core::samplers::{sample_partition, MlSampler, PosteriorDiversitySampler, SeedSpec};
use pitman_core::{ModelParams, PosteriorContext};

fn samplers(c: &mut Criterion) {
    let params = ModelParams::new(0.5, 2.0).unwrap();
    let mut rng = SeedSpec::new(1, 0).rng();
    c.bench_function("sample_partition/1000", |b| b.iter(|| sample_partition(params, black_box(1000), &mut rng)));
    let ml = MlSampler::new(params).unwrap();
    c.bench_function("ml_sampler", |b| b.iter(|| ml.sample(&mut rng)));
    let ctx = PosteriorContext::new(ModelParams::new(0.5, 1.0).unwrap(), 10, 4).unwrap();
    let diversity = PosteriorDiversitySampler::new(&ctx).unwrap();
    c.bench_function("posterior_diversity_sampler", |b| b.iter(|| diversity.sample(&mut rng)));
}

fn fitting(c: &mut Criterion) {
    let params = ModelParams::new(0.5, 2.0).unwrap();
    let part = sample_partition(params, 5000, &mut SeedSpec::new(3, 0).rng()).unwrap();
    let sample = SpeciesSample::from_partition(&part);
    let mut group = c.benchmark_group("fit_eppf");
    group.sample_size(20);
    group.bench_function("n=5000", |b| b.iter(|| fit_eppf(black_box(&sample), FitBox::default())));
    group.finish();
}

criterion_group!(benches, samplers, fitting);
criterion_main!(benches);
