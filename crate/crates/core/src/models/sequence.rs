//! The Haar multiresolution transported to `ℓ²(ℕ)` through the Hermite
//! basis: `b^{(j,k)}_l = 2^{-j/2} ∫_{2^j k}^{2^j(k+1)} ψ_l(x) dx`.
//!
//! Vectors are kept through their preimage on the dyadic carrier, so `τ`
//! and `π` act exactly and inner products follow from Parseval. The first
//! `lmax` sequence coordinates are produced on demand by cell-wise
//! Gauss–Legendre quadrature, together with the fraction of the norm that
//! lies beyond the truncation.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{MraError, Result};
use crate::hilbert::{ModelSpace, SpaceKind, StateVector, Tolerances};
use crate::models::dyadic::DyadicPair;
use crate::models::hermite::{hermite_functions, negligible_radius};
use crate::operators::{apply_word, OperatorWord, UnitaryPair};
use crate::quadrature::GaussLegendre;

/// Widest quadrature panel used when integrating Hermite functions.
const MAX_PANEL: f64 = 1.0 / 16.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceConfig {
    /// Number of retained sequence coordinates.
    pub lmax: usize,
    /// Carrier grid level.
    pub level: u32,
    pub half_extent: i64,
    pub quadrature_order: usize,
    /// Largest norm fraction an incoming coefficient array may lose when
    /// mapped onto the carrier.
    pub loss_threshold: f64,
}

impl Default for SequenceConfig {
    fn default() -> Self {
        SequenceConfig {
            lmax: 128,
            level: 4,
            half_extent: 96,
            quadrature_order: 16,
            loss_threshold: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SequenceModel {
    pub space: Arc<ModelSpace>,
    pub pair: Arc<DyadicPair>,
    /// `Φ = b^{(0,0)}`.
    pub phi: StateVector,
    config: SequenceConfig,
    rule: GaussLegendre,
}

/// Truncated coordinates of a vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceCoefficients {
    pub coeffs: Vec<Complex64>,
    /// `1 − Σ_{l<lmax} |c_l|² / ‖v‖²`.
    pub discarded_fraction: f64,
}

pub fn make_sequence_model(config: SequenceConfig) -> Result<SequenceModel> {
    if config.lmax == 0 {
        return Err(MraError::Config("sequence truncation must be positive".into()));
    }
    if config.quadrature_order < 2 {
        return Err(MraError::Config("quadrature order must be at least 2".into()));
    }
    if !(config.loss_threshold > 0.0 && config.loss_threshold < 1.0) {
        return Err(MraError::Config(format!(
            "loss threshold {} outside (0, 1)",
            config.loss_threshold
        )));
    }
    let pair = DyadicPair::new(
        "sequence",
        SpaceKind::SequenceSpace,
        config.level,
        config.half_extent,
        Tolerances::default().quadrature,
        format!("gauss-legendre-{}", config.quadrature_order).as_str(),
    )?;
    let phi = pair.indicator(0.0, 1.0, 1.0)?;
    Ok(SequenceModel {
        space: pair.space().clone(),
        pair: Arc::new(pair),
        phi,
        rule: GaussLegendre::new(config.quadrature_order),
        config,
    })
}

impl SequenceModel {
    pub fn config(&self) -> &SequenceConfig {
        &self.config
    }

    /// The atom `b^{(j,k)}` as a carrier vector.
    pub fn atom(&self, j: i32, k: i64) -> Result<StateVector> {
        let s = 2f64.powi(j);
        self.pair
            .indicator(s * k as f64, s * (k + 1) as f64, 2f64.powf(-0.5 * j as f64))
    }

    /// The first `lmax` coordinates of `b^{(j,k)}`, integrated directly
    /// over the whole interval with adaptive quadrature.
    pub fn atom_coefficients(&self, j: i32, k: i64, lmax: usize) -> Vec<f64> {
        let s = 2f64.powi(j);
        let r = negligible_radius(lmax);
        let a = (s * k as f64).max(-r);
        let b = (s * (k + 1) as f64).min(r);
        let mut out = vec![0.0; lmax];
        if a >= b {
            return out;
        }
        let scale = 2f64.powf(-0.5 * j as f64);
        let rule = GaussLegendre::new(24);
        let mut buf = vec![0.0; lmax];
        for (l, slot) in out.iter_mut().enumerate() {
            let value = rule.integrate_adaptive(a, b, 1e-14, |x| {
                hermite_functions(x, &mut buf[..=l]);
                buf[l]
            });
            *slot = scale * value;
        }
        out
    }

    /// First `lmax` sequence coordinates `⟨v, ψ_l⟩` of a carrier vector.
    pub fn coefficients(&self, v: &StateVector) -> Result<SequenceCoefficients> {
        v.same_space(&self.phi)?;
        let lmax = self.config.lmax;
        let r = negligible_radius(lmax);
        let h = self.pair.spacing();
        let panels = (h / MAX_PANEL).ceil().max(1.0) as usize;
        let width = h / panels as f64;
        let mut re = vec![0.0; lmax];
        let mut im = vec![0.0; lmax];
        let mut cell = vec![0.0; lmax];
        for (i, c) in v.coeffs().iter().enumerate() {
            if *c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let a = (v.offset() + i as i64) as f64 * h;
            if a + h <= -r || a >= r {
                continue;
            }
            cell.iter_mut().for_each(|x| *x = 0.0);
            for p in 0..panels {
                let lo = a + p as f64 * width;
                self.rule
                    .integrate_into(lo, lo + width, &mut cell, |x, out| hermite_functions(x, out));
            }
            for l in 0..lmax {
                re[l] += c.re * cell[l];
                im[l] += c.im * cell[l];
            }
        }
        let coeffs: Vec<Complex64> = re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect();
        let kept: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        let total = v.norm_sqr();
        let discarded_fraction = if total > 0.0 {
            (1.0 - kept / total).max(0.0)
        } else {
            0.0
        };
        Ok(SequenceCoefficients {
            coeffs,
            discarded_fraction,
        })
    }

    /// Maps a truncated coefficient array `Σ c_l ψ_l` onto the carrier by
    /// cell averaging; fails when more than the configured fraction of the
    /// norm is lost.
    pub fn from_coefficients(&self, coeffs: &[Complex64]) -> Result<StateVector> {
        let total: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if total == 0.0 {
            return Ok(StateVector::zero(self.space.clone()));
        }
        let n = coeffs.len();
        let r = negligible_radius(n).min(self.pair.half_extent() as f64);
        let per_unit = self.pair.cells_per_unit();
        let (lo, hi) = (
            (-r * per_unit as f64).floor() as i64,
            (r * per_unit as f64).ceil() as i64,
        );
        let h = self.pair.spacing();
        let panels = (h / MAX_PANEL).ceil().max(1.0) as usize;
        let width = h / panels as f64;
        let mut cell = vec![0.0; n];
        let mut values = Vec::with_capacity((hi - lo) as usize);
        for i in lo..hi {
            cell.iter_mut().for_each(|x| *x = 0.0);
            let a = i as f64 * h;
            for p in 0..panels {
                let x0 = a + p as f64 * width;
                self.rule
                    .integrate_into(x0, x0 + width, &mut cell, |x, out| hermite_functions(x, out));
            }
            let mean: Complex64 = coeffs.iter().zip(&cell).map(|(c, w)| c * *w).sum::<Complex64>() / h;
            values.push(mean);
        }
        let v = StateVector::new(self.space.clone(), lo, values).trimmed();
        let fraction = (1.0 - v.norm_sqr() / total).max(0.0);
        if fraction > self.config.loss_threshold {
            return Err(MraError::LossyTransport { fraction });
        }
        Ok(v)
    }

    /// Applies a word and reports the truncation loss of the result.
    pub fn apply_with_loss(&self, word: &OperatorWord, v: &StateVector) -> Result<(StateVector, f64)> {
        let out = apply_word(self.pair.as_ref(), word, v)?;
        let loss = self.coefficients(&out)?.discarded_fraction;
        Ok((out, loss))
    }
}

/// `Σ_{l<n} a_l conj(b_l)` over the common truncation.
pub fn coefficient_inner_product(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

/// Largest entry of `|G − I|` for the truncated Gram matrix of real rows.
pub fn truncated_gram_deviation(rows: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in rows.iter().enumerate() {
        for (j, b) in rows.iter().enumerate() {
            let g: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - target).abs());
        }
    }
    worst
}
