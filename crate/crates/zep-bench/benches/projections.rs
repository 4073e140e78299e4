use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use zep::config::Config;
use zep::projections::{
    build_oriented_integrals, fast_projection, integral_projection_naive, scan_projections,
    scan_projections_naive, Axis,
};
use zep::Rect;
use zep_bench::bench_face;

fn bench_projections(c: &mut Criterion) {
    let config = Config::default();
    let (face, _) = bench_face(&config);
    let full = face.full_rect();
    let (patch, stride) = (config.patch_size, config.scan_stride);
    let window = Rect::new(100, 170, 100, 170).unwrap();

    c.bench_function("tables/build_300x300", |b| {
        b.iter(|| black_box(build_oriented_integrals(&face)))
    });

    let tables = build_oriented_integrals(&face);
    c.bench_function("projection/fast_71", |b| {
        b.iter(|| black_box(fast_projection(&tables, window, Axis::Horizontal).unwrap()))
    });
    c.bench_function("projection/naive_71", |b| {
        b.iter(|| black_box(integral_projection_naive(&face, window, Axis::Horizontal).unwrap()))
    });

    let mut group = c.benchmark_group("scan_300x300_71_stride2");
    group.sample_size(20);
    group.bench_function("fast", |b| {
        b.iter_batched(
            || scan_projections(&face, full, patch, patch, stride).unwrap(),
            |scan| {
                for w in scan {
                    black_box(&w.gray_h);
                }
            },
            BatchSize::LargeInput,
        )
    });
    group.sample_size(10);
    group.bench_function("naive", |b| {
        b.iter_batched(
            || scan_projections_naive(&face, full, patch, patch, stride).unwrap(),
            |scan| {
                for w in scan {
                    black_box(&w.gray_h);
                }
            },
            BatchSize::LargeInput,
        )
    });
    group.finish();
}

criterion_group!(benches, bench_projections);
criterion_main!(benches);
