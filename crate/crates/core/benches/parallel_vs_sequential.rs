//! Parallel grid loops against the sequential path on the same inputs.
//! With the `parallel` feature off both arms run sequentially.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use weylkit::curvature::compute_curvature;
use weylkit::exec;
use weylkit::field::{metric_family, Field, GridSpec, MetricFamily, Spectral};
use weylkit::solver::{EllipticOperator, Mode};

fn both<F: Fn()>(c: &mut Criterion, group: &str, n: usize, f: F) {
    let mut g = c.benchmark_group(group);
    g.sample_size(10);
    g.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, _| b.iter(&f));
    g.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, _| b.iter(|| exec::sequential(&f)));
    g.finish();
}

fn benches(c: &mut Criterion) {
    exec::init_thread_pool();
    let spec = GridSpec::new(8).unwrap();
    let metric = metric_family(&MetricFamily::perturbed(0.05), &spec).unwrap();
    both(c, "compute_curvature", 8, || {
        black_box(compute_curvature(black_box(&metric)).unwrap());
    });

    let spec = GridSpec::new(12).unwrap();
    let b = compute_curvature(&metric_family(&MetricFamily::perturbed(0.05), &spec).unwrap()).unwrap();
    let op = EllipticOperator::geometric(&b, Mode::Nondegenerate).unwrap();
    let v = Field::from_fn(spec, |x| 1.0 + 0.1 * x[0].sin() * x[3].cos());
    both(c, "apply_l", 12, || {
        black_box(op.apply(black_box(v.data())));
    });

    let spec = GridSpec::new(16).unwrap();
    let sp = Spectral::new(&spec);
    let f = Field::from_fn(spec, |x| (x[0] + 2.0 * x[1]).sin() * x[2].cos() + x[3].sin());
    both(c, "spectral_gradient", 16, || {
        black_box(sp.gradient(black_box(f.data())));
    });
}

criterion_group!(parallel_vs_sequential, benches);
criterion_main!(parallel_vs_sequential);
