use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use isoweyl_bench::{points, random_spec, rational_point, SEED};
use isoweyl_core::classify::{conformal_flatness, table1_residuals};
use isoweyl_core::curvature::curvature;
use isoweyl_core::exact::{case_spec, run_identity};
use isoweyl_core::sampling::SamplePlan;
use isoweyl_core::{BigRational, IdentityCase, IdentityKind};

fn curvature_f64(c: &mut Criterion) {
    let spec = random_spec();
    let p = points(&spec, 1)[0];
    c.bench_function("curvature_f64", |b| b.iter(|| curvature::<f64>(black_box(&spec), black_box(&p)).unwrap()));
}

fn curvature_exact(c: &mut Criterion) {
    let case = IdentityCase::new(IdentityKind::WeylLemmaB, None, 1, SEED).unwrap();
    let spec = case_spec(&case).unwrap();
    let p = rational_point();
    c.bench_function("curvature_exact", |b| {
        b.iter(|| curvature::<BigRational>(black_box(&spec), black_box(&p)).unwrap())
    });
}

fn closed_forms(c: &mut Criterion) {
    let spec = random_spec();
    let p = points(&spec, 1)[0];
    c.bench_function("table1_residuals", |b| b.iter(|| table1_residuals(black_box(&spec), black_box(&p)).unwrap()));
}

fn identity_det_m(c: &mut Criterion) {
    let case = IdentityCase::new(IdentityKind::DetM, None, 10, SEED).unwrap();
    c.bench_function("verify_detM_10", |b| b.iter(|| run_identity(black_box(&case)).unwrap()));
}

fn flatness(c: &mut Criterion) {
    let spec = random_spec();
    let plan = SamplePlan::new(100, SEED);
    c.bench_function("conformal_flatness_100", |b| {
        b.iter(|| conformal_flatness(black_box(&spec), &plan, 1e-8).unwrap())
    });
}

criterion_group!(benches, curvature_f64, curvature_exact, closed_forms, identity_det_m, flatness);
criterion_main!(benches);
