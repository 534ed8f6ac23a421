//! Parallel vs sequential comparison for the data-parallel hot paths:
//! delay-configuration sweeps and box-image sampling.
//!
//! Run with `cargo bench -p attracta`. Building with
//! `--no-default-features` makes the "parallel" entry run the sequential
//! code path, which is the point of the comparison.

use attracta::certifier::{verify_box_mapping, BoxRegion};
use attracta::config::parse_config;
use attracta::model::VectorMap;
use attracta::repro::{run_sweep, run_sweep_sequential, DelayPreset, EXAMPLE1_CONFIG};
use criterion::{criterion_group, criterion_main, Criterion};
use std::sync::Arc;

fn sweep_presets() -> Vec<DelayPreset> {
    // kernel rows carry real quadrature work, so the parallel/sequential
    // contrast is visible above thread overhead
    (1..=8)
        .map(|k| DelayPreset::UniformKernel {
            width: 0.5 * k as f64,
        })
        .collect()
}

fn bench_sweep(c: &mut Criterion) {
    let cfg = parse_config(EXAMPLE1_CONFIG).unwrap();
    let target = [1.0, 1.0];
    let mut group = c.benchmark_group("sweep_8_kernel_widths");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| run_sweep(&cfg, sweep_presets(), &target, 1e-3))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| run_sweep_sequential(&cfg, sweep_presets(), &target, 1e-3))
    });
    group.finish();
}

fn bench_box_sampling(c: &mut Criterion) {
    let f = VectorMap::new(vec![
        Arc::new(|x: &[f64]| (0.5 * x[0] + 0.5 * x[1]).sqrt())
            as Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
        Arc::new(|x: &[f64]| (0.5 * x[0] + 0.5 * x[1]).sqrt()),
    ]);
    let inner = BoxRegion::new(vec![0.55, 0.55], vec![1.45, 1.45]).unwrap();
    let outer = BoxRegion::new(vec![0.68, 0.68], vec![1.32, 1.32]).unwrap();
    let mut group = c.benchmark_group("box_image_sampling_100k");
    group.sample_size(20);
    group.bench_function("latin_hypercube", |b| {
        b.iter(|| verify_box_mapping(&f, &inner, &outer, 100_000, 0x5eed).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_sweep, bench_box_sampling);
criterion_main!(benches);
