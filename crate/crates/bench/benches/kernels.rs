use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qms_core::algebra::generated_algebra;
use qms_core::analysis::{self, DEFAULT_CERTIFICATE_SEED};
use qms_core::gksl::{vectorize, Side};
use qms_core::linalg::{expm, real};
use qms_core::models::{random_gksl, standard_fixture};
use qms_core::report::analyze;
use qms_core::Tolerances;

fn algebra(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("generated_algebra");
    for n in [3, 4, 6] {
        let ops = random_gksl(n, 2, 1).unwrap().drift_and_jumps();
        group.bench_with_input(BenchmarkId::from_parameter(n), &ops, |b, ops| {
            b.iter(|| generated_algebra(n, black_box(ops), true, &tol).unwrap())
        });
    }
    group.finish();
}

fn spectrum(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("peripheral_spectrum");
    for n in [3, 4, 6] {
        let m = random_gksl(n, 2, 2).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| {
            b.iter(|| analysis::peripheral_spectrum(black_box(m), &tol).unwrap())
        });
    }
    group.finish();
}

fn exponential(c: &mut Criterion) {
    let mut group = c.benchmark_group("expm");
    for n in [3, 4, 6] {
        let l = vectorize(&random_gksl(n, 2, 3).unwrap(), Side::Schrodinger).matrix() * real(2.0);
        group.bench_with_input(BenchmarkId::from_parameter(n * n), &l, |b, l| {
            b.iter(|| expm(black_box(l)).unwrap())
        });
    }
    group.finish();
}

fn full_report(c: &mut Criterion) {
    let tol = Tolerances::default();
    let m = standard_fixture("BD6").unwrap();
    c.bench_function("analyze/BD6", |b| {
        b.iter(|| analyze(black_box(&m), &tol, None, DEFAULT_CERTIFICATE_SEED))
    });
}

criterion_group!(benches, algebra, spectrum, exponential, full_report);
criterion_main!(benches);
