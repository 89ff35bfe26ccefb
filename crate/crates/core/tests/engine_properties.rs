use std::sync::Arc;

use mra_core::engine::{
    construct_mother_wavelet, tsr_residual, wavelet_coefficient_consistency, Filter, ScalingSystem,
    WaveletVariant,
};
use mra_core::models::make_haar_line_model;
use mra_core::operators::verify_commutation_law;
use mra_core::{Complex64, UnitaryPair};
use proptest::prelude::*;

/// Coefficient-only system on the Haar carrier for an arbitrary filter.
fn formal_system(h: Filter) -> ScalingSystem {
    let m = make_haar_line_model(3, 32).unwrap();
    let pair: Arc<dyn UnitaryPair> = m.pair.clone();
    let mut sys = ScalingSystem {
        model: "formal".into(),
        phi: m.phi.clone(),
        seed: m.phi,
        pair,
        h_real: h.is_real(1e-12),
        h,
    };
    sys.phi = sys.refine(&sys.h).unwrap();
    sys
}

fn arb_filter() -> impl Strategy<Value = Filter> {
    (-3i64..3, proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..6)).prop_map(|(offset, taps)| {
        Filter::new(offset, taps.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn vector_side_matches_coefficient_side(h in arb_filter()) {
        let energy = h.energy().sqrt();
        prop_assume!(energy > 1e-3);
        let h = Filter::new(h.offset, h.coeffs.iter().map(|c| c / energy).collect());
        let sys = formal_system(h);
        for variant in [WaveletVariant::Standard, WaveletVariant::Alternate] {
            let fam = construct_mother_wavelet(Arc::new(sys.clone()), variant).unwrap();
            prop_assert!(wavelet_coefficient_consistency(&fam, -4..=4).unwrap() < 1e-10);
        }
    }

    #[test]
    fn perturbed_filter_residual_equals_perturbation(delta in -0.5f64..0.5, n in 0i64..2) {
        let m = make_haar_line_model(4, 16).unwrap();
        let sys = mra_core::engine::extract_tsr_coefficients(&m.phi, m.pair.clone(), -2..=3).unwrap();
        let mut h = sys.h.clone();
        h.coeffs[n as usize] += delta;
        let r = tsr_residual(&sys.with_filter(h)).unwrap();
        prop_assert!((r - delta.abs()).abs() < 1e-12);
    }

    #[test]
    fn haar_commutation_holds_for_any_seed(seed in any::<u64>()) {
        let m = make_haar_line_model(4, 96).unwrap();
        let r = verify_commutation_law(m.pair.as_ref(), 2, 4, 2, seed).unwrap();
        prop_assert!(r.max_residual < 1e-12);
    }
}
