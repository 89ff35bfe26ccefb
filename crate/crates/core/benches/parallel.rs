use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mra_core::approximation::density_diagnostic;
use mra_core::engine::extract_tsr_coefficients;
use mra_core::models::make_haar_line_model;
use mra_core::operators::{trial_rng, verify_commutation_law_with};
use mra_core::solver::fixtures::four_dim_fixture;
use mra_core::solver::{solve_scaling_vector, FilterMode, SolverOptions};
use mra_core::{Execution, StateVector, UnitaryPair};

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn commutation(c: &mut Criterion) {
    let m = make_haar_line_model(4, 96).unwrap();
    let mut group = c.benchmark_group("commutation");
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| verify_commutation_law_with(m.pair.as_ref(), 3, 8, 32, black_box(7), exec).unwrap())
        });
    }
    group.finish();
}

fn density(c: &mut Criterion) {
    let m = make_haar_line_model(4, 96).unwrap();
    let sys = extract_tsr_coefficients(&m.phi, m.pair.clone(), -4..=5).unwrap();
    let samples: Vec<StateVector> = (0..8).map(|t| m.pair.random_vector(&mut trial_rng(3, t), 4)).collect();
    let mut group = c.benchmark_group("density");
    group.sample_size(20);
    for (name, exec) in POLICIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| density_diagnostic(black_box(&samples), &sys, -2..=2, -16..=16, exec).unwrap())
        });
    }
    group.finish();
}

fn solver(c: &mut Criterion) {
    let f = four_dim_fixture(21).unwrap();
    let mode = FilterMode::Free { lo: 0, hi: 1 };
    let mut group = c.benchmark_group("solver-multistart");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        let options = SolverOptions {
            exec,
            ..SolverOptions::default()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| solve_scaling_vector(&f.pair, black_box(&mode), &options).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, commutation, density, solver);
criterion_main!(benches);
