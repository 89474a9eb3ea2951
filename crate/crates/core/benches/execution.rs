use std::f64::consts::{FRAC_PI_4, PI};
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use muntz_core::biortho::{monomial, BoundaryFunctional, QuadratureSpec};
use muntz_core::fuchs::{NormalizedKernel, PsiKernel, TruncatedProduct};
use muntz_core::quadrature::{composite_doubling, ConsumerBounds, PathTable, TableSettings};
use muntz_core::sequences::{ExponentSequence, SequenceRule};
use muntz_core::Execution;
use num_complex::Complex64;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn squares() -> TruncatedProduct {
    TruncatedProduct::new(ExponentSequence::generated(SequenceRule::Power { exponent: 2.0 }, 1000.0).unwrap()).unwrap()
}

fn transforms(c: &mut Criterion) {
    let p = squares();
    let kernel = NormalizedKernel::new(&p, 0.0, PI * PI / 6.0).unwrap();
    let psi = PsiKernel { kernel, k: 3, damping: 0.05 };
    let d = Complex64::i();
    let logs: Vec<Complex64> = (0..256).map(|j| Complex64::new(-36.0 * j as f64 / 255.0, -FRAC_PI_4)).collect();
    let table = PathTable::build(&psi, d, ConsumerBounds::from_logs(d, &logs), &TableSettings::default()).unwrap();
    let mut group = c.benchmark_group("edge_transforms");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| exec.map(&logs, |l| table.transform(*l)).len())
        });
    }
    group.finish();
}

fn functional(c: &mut Criterion) {
    let p = squares();
    let kernel = NormalizedKernel::new(&p, 0.0, PI * PI / 6.0).unwrap();
    let psi = PsiKernel { kernel, k: 2, damping: 0.05 };
    let mut group = c.benchmark_group("psi_functional");
    group.sample_size(10);
    for (name, execution) in MODES {
        let quad = QuadratureSpec { execution, ..QuadratureSpec::default() };
        group.bench_function(name, |b| {
            b.iter(|| {
                let t = BoundaryFunctional::new(&psi, FRAC_PI_4, quad).unwrap();
                black_box(t.apply(&monomial(Complex64::new(4.0, 0.0))).unwrap().value)
            })
        });
    }
    group.finish();
}

fn composite(c: &mut Criterion) {
    let mut group = c.benchmark_group("composite_doubling");
    let f = |x: f64| Ok(Complex64::new(0.0, 40.0 * x).exp() / (1.0 + x * x));
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| composite_doubling(f, 0.0, 50.0, 1e-12, 64, 1 << 16, exec).unwrap().value));
    }
    group.finish();
}

criterion_group!(benches, transforms, functional, composite);
criterion_main!(benches);
