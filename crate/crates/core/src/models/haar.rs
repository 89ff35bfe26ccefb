//! The Haar multiresolution of `L²(ℝ)`: `T f(x) = f(x − 1)`,
//! `P f(x) = √2 f(2x)`, `Φ = χ_[0,1)`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{MraError, Result};
use crate::hilbert::{ModelSpace, SpaceKind, StateVector, Tolerances};
use crate::models::dyadic::DyadicPair;
use crate::operators::UnitaryPair;

#[derive(Clone, Debug)]
pub struct HaarLineModel {
    pub space: Arc<ModelSpace>,
    pub pair: Arc<DyadicPair>,
    pub phi: StateVector,
}

/// Dyadic grid of spacing `2^-level` on `[-half_extent, half_extent)`.
pub fn make_haar_line_model(level: u32, half_extent: i64) -> Result<HaarLineModel> {
    if level < 1 {
        return Err(MraError::Config("Haar model needs level >= 1".into()));
    }
    if half_extent < 4 {
        return Err(MraError::Config(format!(
            "extent {half_extent} too small for a two-scale application (need >= 4)"
        )));
    }
    let pair = DyadicPair::new(
        "haar",
        SpaceKind::DyadicLine,
        level,
        half_extent,
        Tolerances::default().exact,
        "midpoint",
    )?;
    let phi = pair.indicator(0.0, 1.0, 1.0)?;
    Ok(HaarLineModel {
        space: pair.space().clone(),
        pair: Arc::new(pair),
        phi,
    })
}

impl HaarLineModel {
    /// Samples a function at cell midpoints over `[a, b)`.
    pub fn sample_real<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> Result<StateVector> {
        self.pair.sample(a, b, |x| Complex64::new(f(x), 0.0))
    }

    /// `2^{-l/2} χ_[2^l k, 2^l (k+1))`, the closed form of `π^{-l} τ^k Φ`.
    pub fn dyadic_indicator(&self, l: i32, k: i64) -> Result<StateVector> {
        let s = 2f64.powi(l);
        self.pair
            .indicator(s * k as f64, s * (k + 1) as f64, 2f64.powf(-0.5 * l as f64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{apply_word, OperatorWord};

    #[test]
    fn scaling_function_and_dilation() {
        let m = make_haar_line_model(4, 8).unwrap();
        assert!((m.phi.norm() - 1.0).abs() < 1e-15);
        let p_phi = m.pair.pi_apply(&m.phi).unwrap();
        let expect = m.pair.indicator(0.0, 0.5, 2f64.sqrt()).unwrap();
        assert!(p_phi.distance(&expect).unwrap() < 1e-15);
    }

    #[test]
    fn word_matches_closed_form_dyadic_indicator() {
        let m = make_haar_line_model(4, 16).unwrap();
        let word = OperatorWord::pi(-1).then(&OperatorWord::tau(1));
        let got = apply_word(m.pair.as_ref(), &word, &m.phi).unwrap();
        let oracle = m.dyadic_indicator(1, 1).unwrap();
        assert!(got.distance(&oracle).unwrap() < 1e-15);
        // 2^{-1/2} on [2, 4)
        assert!((m.pair.value_at(&got, 3.0).re - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.pair.value_at(&got, 1.9).re, 0.0);
    }

    #[test]
    fn configuration_errors() {
        assert!(matches!(make_haar_line_model(0, 8), Err(MraError::Config(_))));
        assert!(matches!(make_haar_line_model(3, 3), Err(MraError::Config(_))));
    }
}
