use std::hint::black_box;
use std::path::Path;

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use singlepeak_core::quadrature::{integrate_peaked, Chart};
use singlepeak_core::*;

fn d5() -> Dimension {
    Dimension::new(5).unwrap()
}

fn gamma(c: &mut Criterion) {
    let basis = FieldBasis::with_defaults(d5()).unwrap();
    let pot = make_potential(
        &PotentialSpec::family("gaussian-envelope"),
        &PotentialSpec::family("gaussian"),
        d5(),
        Path::new("."),
    )
    .unwrap();
    let m = Melnikov::new(&basis, pot, G2Rule::default()).unwrap();
    let xi = vec![0.4, -0.2, 0.0, 0.1, 0.0];
    let mut g = c.benchmark_group("gamma");
    g.sample_size(10);
    g.bench_function("default basis", |b| b.iter(|| m.gamma(black_box(0.7), black_box(&xi)).unwrap()));
    g.finish();
}

fn hessian(c: &mut Criterion) {
    let mut g = c.benchmark_group("hessian");
    g.sample_size(10);
    for (kmax, nr) in [(4, 48), (8, 64)] {
        let basis = FieldBasis::new(d5(), kmax, nr).unwrap();
        g.bench_function(format!("build kmax {kmax} nodes {nr}"), |b| {
            b.iter(|| BlockDiagonalHessian::new(black_box(&basis)).unwrap())
        });
    }
    g.finish();
}

fn peaked(c: &mut Criterion) {
    let f = |x: &[f64]| (-x.iter().map(|v| (v - 1.0) * (v - 1.0)).sum::<f64>()).exp();
    let peak = Chart::new(vec![0.0; 5], 0.05);
    let feature = Chart::new(vec![1.0; 5], 1.0);
    c.bench_function("peaked gaussian", |b| {
        b.iter(|| integrate_peaked(&f, black_box(&peak), &feature, 10, 3).unwrap())
    });
}

fn lz(c: &mut Criterion) {
    let basis = FieldBasis::with_defaults(d5()).unwrap();
    let h = BlockDiagonalHessian::new(&basis).unwrap();
    let b = Bubble::new(0.3, 0.8, vec![0.1, 0.0, -0.2, 0.0, 0.0]).unwrap();
    let k = ComplexField::from_unit_fn(&basis, b.frame(), FieldKind::Dual, |y| {
        let q = 1.0 + y.iter().map(|v| v * v).sum::<f64>();
        Complex64::new(y[0], 0.5 * y[1] * y[2]) / q.powi(4)
    });
    c.bench_function("apply_lz", |bch| bch.iter(|| h.apply_lz(black_box(&b), &k).unwrap()));
}

criterion_group!(benches, gamma, hessian, peaked, lz);
criterion_main!(benches);
