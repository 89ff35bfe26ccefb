use std::sync::Arc;

use mra_core::approximation::{project_level, random_level_vector, KWindow};
use mra_core::engine::extract_tsr_coefficients;
use mra_core::models::make_haar_line_model;
use mra_core::operators::trial_rng;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn projections_nest_and_are_idempotent(seed in any::<u64>(), j in -2i64..2) {
        let m = make_haar_line_model(4, 64).unwrap();
        let sys = Arc::new(extract_tsr_coefficients(&m.phi, m.pair.clone(), -3..=4).unwrap());
        let mut rng = trial_rng(seed, 0);
        let f = random_level_vector(&sys, -3, -12..=12, &mut rng).unwrap();
        let w = KWindow::default();
        let p = project_level(&f, j, &sys, &w).unwrap();
        let q = project_level(&f, j + 1, &sys, &w).unwrap();
        prop_assert!(q.vector.norm() <= p.vector.norm() + 1e-10);
        let pp = project_level(&p.vector, j, &sys, &w).unwrap();
        prop_assert!(pp.vector.distance(&p.vector).unwrap() < 1e-11);
        prop_assert!(!p.window_warning);
    }
}
