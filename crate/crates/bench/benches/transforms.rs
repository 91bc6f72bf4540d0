use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nufrecon::{PATransform, Phantom, TransformMode};
use nufrecon_bench::problem;
use std::hint::black_box;

fn forward_adjoint(c: &mut Criterion) {
    let mut group = c.benchmark_group("forward");
    for (phantom, points, mode) in [
        (Phantom::F1, 257, TransformMode::Direct),
        (Phantom::F1, 257, TransformMode::Accelerated),
        (Phantom::F3, 129, TransformMode::Accelerated),
        (Phantom::F3, 257, TransformMode::Accelerated),
    ] {
        let p = problem(phantom, points, mode);
        let id = format!("{}_{points}_{mode:?}", phantom.name());
        group.bench_with_input(BenchmarkId::new("forward", &id), &p, |b, p| b.iter(|| p.operator.forward(black_box(&p.truth)).unwrap()));
        group.bench_with_input(BenchmarkId::new("adjoint", &id), &p, |b, p| b.iter(|| p.operator.adjoint(black_box(&p.data)).unwrap()));
    }
    group.finish();
}

fn toeplitz_normal(c: &mut Criterion) {
    let mut group = c.benchmark_group("normal_apply");
    for points in [129, 257] {
        let p = problem(Phantom::F3, points, TransformMode::Accelerated);
        let normal = p.operator.normal_operator(None).unwrap();
        let mut out = vec![0.0; p.truth.len()];
        group.bench_function(BenchmarkId::from_parameter(points), |b| b.iter(|| normal.apply(black_box(&p.truth.data), &mut out)));
    }
    group.finish();
}

fn pa_apply(c: &mut Criterion) {
    let n = 257;
    let g: Vec<f64> = (0..n * n).map(|i| (i as f64 * 0.37).sin()).collect();
    let mut group = c.benchmark_group("pa_apply_2d");
    for m in [1, 2, 3] {
        let l = PATransform::build(m, n).unwrap();
        group.bench_function(BenchmarkId::from_parameter(m), |b| b.iter(|| l.apply_2d(black_box(&g), nufrecon::Axis::Rows).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, forward_adjoint, toeplitz_normal, pa_apply);
criterion_main!(benches);
