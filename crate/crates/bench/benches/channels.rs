use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qdsm_core::extremality::{choi_extremal_test, decompose_extremal, landau_streater_test, DEFAULT_MAX_DEPTH};
use qdsm_core::{birkhoff_decompose, classify, ExtremalityKind, Tolerance};

fn extremality(c: &mut Criterion) {
    let tol = Tolerance::default();
    let mut group = c.benchmark_group("extremality");
    for (n, d) in [(2, 2), (3, 3), (4, 4)] {
        let ch = &qdsm_bench::channels(n, d, 1, 1)[0];
        group.bench_with_input(BenchmarkId::new("choi", format!("{n}x{d}")), ch, |b, ch| {
            b.iter(|| choi_extremal_test(ch, &tol).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("landau_streater", format!("{n}x{d}")), ch, |b, ch| {
            b.iter(|| landau_streater_test(ch, &tol).unwrap())
        });
    }
    group.finish();
}

fn decomposition(c: &mut Criterion) {
    let tol = Tolerance::default();
    let ch = &qdsm_bench::channels(2, 4, 1, 2)[0];
    c.bench_function("decompose_qubit_cp_phi", |b| {
        b.iter(|| decompose_extremal(ch, ExtremalityKind::CpPhi, DEFAULT_MAX_DEPTH, &tol).unwrap())
    });
}

fn spectral(c: &mut Criterion) {
    let tol = Tolerance::default();
    let mut group = c.benchmark_group("classify");
    for n in [2, 4, 6] {
        let ch = &qdsm_bench::channels(n, 2, 1, 3)[0];
        group.bench_with_input(BenchmarkId::from_parameter(n), ch, |b, ch| b.iter(|| classify(ch, &tol).unwrap()));
    }
    group.finish();
}

fn birkhoff(c: &mut Criterion) {
    let tol = Tolerance::default();
    let mut group = c.benchmark_group("birkhoff");
    for n in [4, 8, 16] {
        let s = qdsm_bench::ds_matrix(n, n, 4);
        group.bench_with_input(BenchmarkId::from_parameter(n), &s, |b, s| {
            b.iter(|| birkhoff_decompose(s, &tol).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, extremality, decomposition, spectral, birkhoff);
criterion_main!(benches);
