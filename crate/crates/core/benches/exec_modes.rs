use std::sync::Arc;

use assocvar::algebra::FpAlgebra;
use assocvar::exec::Exec;
use assocvar::field::Field;
use assocvar::geodesic::{integrate_many, RealChart};
use assocvar::linalg::Matrix;
use assocvar::localrep::{is_simple_with, MatrixModule};
use assocvar::points::enumerate_points_with;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn points(c: &mut Criterion) {
    let a = Arc::new(FpAlgebra::parse("field F31; gens x y z; rel x*y - y*x; rel x*x + y*y + z*z - 1").unwrap());
    let mut g = c.benchmark_group("enumerate_points");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, "sphere F31"), &exec, |b, &e| {
            b.iter(|| enumerate_points_with(&a, e).unwrap())
        });
    }
    g.finish();
}

fn simplicity(c: &mut Criterion) {
    let f = Field::Prime(5);
    let free = Arc::new(FpAlgebra::parse("field F5; gens x y").unwrap());
    let cycle = Matrix::from_i64(f, &[&[0, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1], &[1, 0, 0, 0]]);
    let diag = Matrix::from_i64(f, &[&[1, 0, 0, 0], &[0, 2, 0, 0], &[0, 0, 3, 0], &[0, 0, 0, 4]]);
    let m = MatrixModule::new(free, vec![cycle, diag]).unwrap();
    let mut g = c.benchmark_group("is_simple");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, "r=4 F5"), &exec, |b, &e| b.iter(|| is_simple_with(&m, e).unwrap()));
    }
    g.finish();
}

fn geodesics(c: &mut Criterion) {
    let chart = RealChart::from_algebra(&FpAlgebra::parse("field R; gens x y z; rel x*x + y*y + z*z - 1").unwrap()).unwrap();
    let starts: Vec<(Vec<f64>, Vec<f64>)> = (0..8)
        .map(|k| {
            let a = k as f64 * 0.4;
            (vec![a.cos(), a.sin(), 0.0], vec![0.0, 0.0, 1.0])
        })
        .collect();
    let mut g = c.benchmark_group("integrate_many");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, "8 sphere geodesics"), &exec, |b, &e| {
            b.iter(|| integrate_many(&chart, &starts, 1.0, 1e-3, e))
        });
    }
    g.finish();
}

criterion_group!(benches, points, simplicity, geodesics);
criterion_main!(benches);
