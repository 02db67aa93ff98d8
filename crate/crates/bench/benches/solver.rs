use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use twvort_core::energy::{energy_gradient, energy_hessian, total_energy};
use twvort_core::fields::initial_profile;
use twvort_core::minimizer::minimize;
use twvort_core::odecheck::residuals;
use twvort_core::{MinimizeOptions, ParameterSet, RadialGrid};

fn energy_and_gradient(c: &mut Criterion) {
    let p = ParameterSet::baseline();
    let mut group = c.benchmark_group("energy");
    for cells in [300, 3000] {
        let grid = RadialGrid::production(30.0, cells).unwrap();
        let seed = initial_profile(&p, &grid);
        group.bench_with_input(BenchmarkId::new("total", cells), &cells, |b, _| {
            b.iter(|| total_energy(&p, &grid, black_box(&seed)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("gradient", cells), &cells, |b, _| {
            b.iter(|| energy_gradient(&p, &grid, black_box(&seed)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("residuals", cells), &cells, |b, _| {
            b.iter(|| residuals(&p, &grid, black_box(&seed)).unwrap())
        });
    }
    group.finish();
}

fn hessian_solve(c: &mut Criterion) {
    let p = ParameterSet::baseline();
    let grid = RadialGrid::production(30.0, 3000).unwrap();
    let seed = initial_profile(&p, &grid);
    let rhs = vec![1.0; 4 * grid.node_count()];
    c.bench_function("hessian/assemble_3000", |b| {
        b.iter(|| energy_hessian(&p, &grid, black_box(&seed)).unwrap())
    });
    let h = energy_hessian(&p, &grid, &seed).unwrap();
    c.bench_function("hessian/cholesky_solve_3000", |b| {
        b.iter(|| match h.cholesky() {
            Some(f) => f.solve(black_box(&rhs)),
            None => rhs.clone(),
        })
    });
}

fn small_minimize(c: &mut Criterion) {
    let p = ParameterSet::baseline();
    let grid = RadialGrid::production(20.0, 400).unwrap();
    let seed = initial_profile(&p, &grid);
    let opts = MinimizeOptions::default();
    let mut group = c.benchmark_group("minimize");
    group.sample_size(10);
    group.bench_function("baseline_400", |b| {
        b.iter(|| minimize(&p, &grid, black_box(&seed), &opts).unwrap())
    });
    group.finish();
}

criterion_group!(benches, energy_and_gradient, hessian_solve, small_minimize);
criterion_main!(benches);
