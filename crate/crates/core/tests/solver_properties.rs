use mra_core::solver::fixtures::four_dim_fixture;
use mra_core::solver::{solve_moduli, solve_scaling_vector, FilterMode, MomentSystem, SolverOptions};
use mra_core::Complex64;
use nalgebra::DVector;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn moduli_satisfy_the_moment_rows(n in 1usize..10, shift in 0.0f64..1.0) {
        let nodes: Vec<Complex64> = (0..n)
            .map(|l| Complex64::from_polar(1.0, std::f64::consts::TAU * (l as f64 + shift * 0.5) / n as f64))
            .collect();
        let sys = MomentSystem::new(&nodes).unwrap();
        let sol = solve_moduli(&sys).unwrap();
        let g = DVector::from_vec(sol.gamma_values());
        let lu = sys.e.clone().lu().solve(&DVector::from_fn(n, |i, _| if i == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })).unwrap();
        prop_assert!((&g - &lu).norm() < 1e-9);
        let sum: Complex64 = g.iter().sum();
        prop_assert!((sum - 1.0).norm() < 1e-10);
    }
}

#[test]
fn fixture_search_is_reproducible_across_execution_policies() {
    let f = four_dim_fixture(21).unwrap();
    let mode = FilterMode::Fixed(f.h.clone());
    let par = solve_scaling_vector(&f.pair, &mode, &SolverOptions { seed: 8, ..Default::default() }).unwrap();
    let seq = solve_scaling_vector(
        &f.pair,
        &mode,
        &SolverOptions {
            seed: 8,
            exec: mra_core::Execution::Sequential,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(par, seq);
    assert!(par.feasible);
    let gamma: Vec<f64> = par.gamma.iter().map(|g| g.re).collect();
    let phi = par.phi.unwrap();
    // recovered moduli in the eigenbasis equal γ
    let norm: f64 = phi.iter().map(|c| c.re * c.re + c.im * c.im).sum();
    assert!((norm - 1.0).abs() < 1e-10);
    assert!(gamma.iter().all(|g| (g - 0.25).abs() < 1e-12));
}
