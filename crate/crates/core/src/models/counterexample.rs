//! Complex two-scale coefficients `h = (−i/2, 1/2, i/2, 1/2)` whose
//! translates are orthonormal but whose mother wavelet is not orthogonal
//! to `V₀`.
//!
//! The system runs in coefficient-only mode on the Haar carrier: the seed
//! is `χ_[0,1)`, `Φ = Σ h_n πτ^n χ` and the wavelet is built from the same
//! orthonormal vectors `πτ^n χ`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::engine::{Filter, ScalingSystem};
use crate::error::Result;
use crate::models::haar::make_haar_line_model;
use crate::operators::UnitaryPair;

pub fn counterexample_filter() -> Filter {
    Filter::new(
        0,
        vec![
            Complex64::new(0.0, -0.5),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, 0.5),
            Complex64::new(0.5, 0.0),
        ],
    )
}

pub fn make_complex_counterexample_system() -> Result<ScalingSystem> {
    let carrier = make_haar_line_model(4, 96)?;
    let h = counterexample_filter();
    let pair: Arc<dyn UnitaryPair> = carrier.pair.clone();
    let mut sys = ScalingSystem {
        model: "counterexample".into(),
        phi: carrier.phi.clone(),
        seed: carrier.phi,
        pair,
        h_real: h.is_real(1e-12),
        h,
    };
    sys.phi = sys.refine(&sys.h)?;
    Ok(sys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{
        construct_mother_wavelet, cross_orthogonality, pairwise_orthonormality, tsr_residual, Membership,
        WaveletVariant,
    };

    #[test]
    fn coefficient_identities() {
        let h = counterexample_filter();
        assert!((h.energy() - 1.0).abs() < 1e-15);
        assert!(h.shifted_autocorrelation(1).norm() < 1e-15);
        for k in -3..=3 {
            let target = if k == 0 { 1.0 } else { 0.0 };
            assert!((h.shifted_autocorrelation(k) - target).norm() < 1e-12);
        }
    }

    #[test]
    fn wavelet_leaves_v0() {
        let sys = Arc::new(make_complex_counterexample_system().unwrap());
        assert!(!sys.h_real);
        assert!(tsr_residual(&sys).unwrap() < 1e-12);
        let ortho = pairwise_orthonormality(&sys.phi, sys.pair.as_ref(), -3..=3, Some(&sys)).unwrap();
        assert!(ortho.max_deviation < 1e-12);
        let fam = construct_mother_wavelet(sys, WaveletVariant::Standard).unwrap();
        let r = cross_orthogonality(&fam, -3..=3).unwrap();
        let at = r.values.iter().find(|v| v.k == -1).unwrap();
        // Σ_n (−1)^{n−1} h_{−n−1} conj(h_{n+2}) over n ∈ {−2, −1}
        let oracle = {
            let h = counterexample_filter();
            h.get(0) * h.get(1).conj() - h.get(1) * h.get(0).conj()
        };
        assert!((at.value() - oracle).norm() < 1e-12);
        assert!((at.value() - Complex64::new(0.0, -0.5)).norm() < 1e-12);
        assert_eq!(r.membership, Membership::NotInW0);
        assert!(r.informational);
    }
}
