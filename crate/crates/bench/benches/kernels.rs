//! Microbenchmarks for the hot numerical kernels: transform inversion,
//! principal eigenvalue extraction, the 1D nonlinear solve, and the
//! radial large-solution pipeline.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use quasilog_core::transform;
use quasilog_core::{
    assemble_laplacian, minimal_large_solution, principal_eigen, DualTransform, Grid,
    SolverConfig, StationaryProblem, WeightField, WeightShape,
};

fn bench_transform(c: &mut Criterion) {
    let ts: Vec<f64> = (0..200)
        .map(|i| 10f64.powf(-6.0 + 9.0 * i as f64 / 199.0))
        .collect();
    c.bench_function("transform_f_200pts", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for &t in &ts {
                acc += transform::f(black_box(1.0), black_box(t)).unwrap();
            }
            acc
        })
    });
    c.bench_function("transform_h_inverse_200pts", |b| {
        let ys: Vec<f64> = ts.iter().map(|&t| transform::h(1.0, t).unwrap()).collect();
        b.iter(|| {
            let mut acc = 0.0;
            for &y in &ys {
                acc += transform::h_inverse(black_box(1.0), black_box(y)).unwrap();
            }
            acc
        })
    });
}

fn bench_eigen(c: &mut Criterion) {
    let grid_1d = Grid::interval(0.0, 1.0, 199).unwrap();
    let lap_1d = assemble_laplacian(&grid_1d);
    c.bench_function("eigen_1d_n199", |b| {
        b.iter(|| principal_eigen(black_box(&lap_1d), 1e-10, 10_000).unwrap().lambda1)
    });
    let grid_2d = Grid::unit_square(63).unwrap();
    let lap_2d = assemble_laplacian(&grid_2d);
    c.bench_function("eigen_2d_n63", |b| {
        b.iter(|| principal_eigen(black_box(&lap_2d), 1e-10, 10_000).unwrap().lambda1)
    });
}

fn bench_solve(c: &mut Criterion) {
    let grid = Grid::interval(0.0, 1.0, 99).unwrap();
    let weight = WeightField::build(&grid, WeightShape::Constant { b0: 1.0 }).unwrap();
    let problem =
        StationaryProblem::new(&grid, &weight, DualTransform::new(1.0, 3.0).unwrap()).unwrap();
    let config = SolverConfig::default();
    let lambda = 2.0 * problem.lambda1();
    c.bench_function("solve_positive_1d_n99", |b| {
        b.iter(|| problem.solve_positive(black_box(lambda), &config).unwrap().sup_norm())
    });
}

fn bench_large(c: &mut Criterion) {
    c.bench_function("minimal_large_solution_n840", |b| {
        b.iter(|| {
            minimal_large_solution(2, 0.3, black_box(4.0), 1.0, 4.0, 840, None)
                .unwrap()
                .profile
                .eval(0.0)
        })
    });
}

criterion_group!(benches, bench_transform, bench_eigen, bench_solve, bench_large);
criterion_main!(benches);
