use std::hint::black_box;

use cei_core::samplers::sample_brownian_bridge;
use cei_core::transforms::{condition_min_transform, local_time_shift, vervaat};
use cei_core::{cyclic_shift, reflected_process, shifted_min_profile, Interval, RngStream};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn path_ops(c: &mut Criterion) {
    let iv = Interval::left_open(-0.4, -0.1).unwrap();
    for n in [1024usize, 4096, 16384] {
        let p = sample_brownian_bridge(n, 0.0, &mut RngStream::new(1, 0).rng());
        let mut g = c.benchmark_group(format!("n={n}"));
        g.bench_function("cyclic_shift", |b| {
            b.iter(|| cyclic_shift(black_box(&p), n / 3).unwrap())
        });
        g.bench_function("shifted_min_profile", |b| b.iter(|| shifted_min_profile(black_box(&p))));
        g.bench_function("reflected_process", |b| {
            b.iter(|| reflected_process(black_box(&p)).unwrap())
        });
        g.bench_function("vervaat", |b| b.iter(|| vervaat(black_box(&p))));
        g.bench_function("condition_min", |b| {
            b.iter(|| condition_min_transform(black_box(&p), iv, 0.37).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("local_time_shift", "eps=0.02"), &p, |b, p| {
            b.iter(|| local_time_shift(p, 0.3, 0.02, 0.37))
        });
        g.finish();
    }
}

criterion_group!(benches, path_ops);
criterion_main!(benches);
