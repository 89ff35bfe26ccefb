//! Piecewise-constant vectors on a dyadic grid with exact `T` and `P`.
//!
//! Cell `i` covers `[i 2^-L, (i+1) 2^-L)`. `T f(x) = f(x − 1)` shifts the
//! window by `2^L` cells, `P f(x) = √2 f(2x)` merges aligned cell pairs and
//! `P⁻¹` splits every cell in two. This is the carrier shared by the Haar,
//! warped and sequence models.

use std::sync::Arc;

use num_complex::Complex64;
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{MraError, Result};
use crate::hilbert::{ModelSpace, SpaceKind, StateVector};
use crate::operators::{Generator, UnitaryPair};

/// Largest dilation exponent applied in one step.
const MAX_DILATION: i64 = 40;

#[derive(Clone, Debug)]
pub struct DyadicPair {
    space: Arc<ModelSpace>,
    label: String,
    level: u32,
    tolerance: f64,
    /// Random trial vectors live on `[-w, w)` in model units.
    trial_half_width: i64,
}

impl DyadicPair {
    pub fn new(
        label: impl Into<String>,
        kind: SpaceKind,
        level: u32,
        half_extent: i64,
        tolerance: f64,
        quadrature: &str,
    ) -> Result<Self> {
        if level < 1 || level > 24 {
            return Err(MraError::Config(format!("dyadic level {level} outside 1..=24")));
        }
        if half_extent < 1 {
            return Err(MraError::Config("extent must be positive".into()));
        }
        let label = label.into();
        let per_unit = 1i64 << level;
        let space = ModelSpace::new(
            format!("{label}-L{level}-R{half_extent}"),
            kind,
            level,
            (-half_extent * per_unit, half_extent * per_unit),
            1.0 / per_unit as f64,
            quadrature,
        )?;
        Ok(DyadicPair {
            space,
            label,
            level,
            tolerance,
            trial_half_width: 1,
        })
    }

    pub fn with_trial_half_width(mut self, width: i64) -> Self {
        self.trial_half_width = width.max(1);
        self
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn cells_per_unit(&self) -> i64 {
        1i64 << self.level
    }

    pub fn spacing(&self) -> f64 {
        self.space.weight
    }

    pub fn half_extent(&self) -> i64 {
        self.space.extent.1 / self.cells_per_unit()
    }

    /// `value · χ_[a, b)` for dyadic endpoints `a, b` (in model units).
    pub fn indicator(&self, a: f64, b: f64, value: f64) -> Result<StateVector> {
        let n = self.cells_per_unit() as f64;
        let (lo, hi) = ((a * n).round() as i64, (b * n).round() as i64);
        if ((lo as f64) - a * n).abs() > 1e-9 || ((hi as f64) - b * n).abs() > 1e-9 {
            return Err(MraError::Config(format!(
                "[{a}, {b}) is not resolved at level {}",
                self.level
            )));
        }
        if !self.space.contains_window(lo, hi) {
            return Err(MraError::Config(format!("[{a}, {b}) outside the model window")));
        }
        Ok(StateVector::from_real(
            self.space.clone(),
            lo,
            &vec![value; (hi - lo).max(0) as usize],
        ))
    }

    /// Samples `f` at cell midpoints over `[a, b)`.
    pub fn sample<F: Fn(f64) -> Complex64>(&self, a: f64, b: f64, f: F) -> Result<StateVector> {
        let n = self.cells_per_unit() as f64;
        let lo = (a * n).floor() as i64;
        let hi = (b * n).ceil() as i64;
        if !self.space.contains_window(lo, hi) {
            return Err(MraError::Config(format!("[{a}, {b}) outside the model window")));
        }
        let h = self.spacing();
        let coeffs = (lo..hi).map(|i| f((i as f64 + 0.5) * h)).collect();
        Ok(StateVector::new(self.space.clone(), lo, coeffs))
    }

    /// Value of `v` at the model coordinate `x`.
    pub fn value_at(&self, v: &StateVector, x: f64) -> Complex64 {
        let cell = (x * self.cells_per_unit() as f64).floor() as i64;
        v.get(cell)
    }

    fn check_window(&self, generator: Generator, exponent: i64, lo: i64, hi: i64) -> Result<()> {
        if self.space.contains_window(lo, hi) {
            Ok(())
        } else {
            Err(MraError::WindowOverflow {
                generator,
                exponent,
                lo,
                hi,
            })
        }
    }

    fn contract(&self, v: &StateVector, m: i64) -> Result<StateVector> {
        let block = 1i64 << m;
        let (a, b) = (v.offset(), v.end());
        let lo = a.div_euclid(block);
        let hi = (b + block - 1).div_euclid(block);
        let scale = (block as f64).sqrt();
        let peak = v.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
        let slack = 1e-12 * peak;
        let mut coeffs = Vec::with_capacity((hi - lo) as usize);
        for i in lo..hi {
            let first = v.get(i * block);
            for cell in i * block + 1..(i + 1) * block {
                if (v.get(cell) - first).norm() > slack {
                    return Err(MraError::ResolutionOverflow {
                        generator: Generator::Pi,
                        exponent: m,
                    });
                }
            }
            coeffs.push(first * scale);
        }
        Ok(StateVector::new(self.space.clone(), lo, coeffs))
    }

    fn expand(&self, v: &StateVector, m: i64) -> Result<StateVector> {
        let block = 1i64 << m;
        let (lo, hi) = (v.offset() * block, v.end() * block);
        self.check_window(Generator::Pi, -m, lo, hi)?;
        let scale = 1.0 / (block as f64).sqrt();
        let mut coeffs = Vec::with_capacity((hi - lo) as usize);
        for c in v.coeffs() {
            let c = c * scale;
            coeffs.extend(std::iter::repeat_n(c, block as usize));
        }
        Ok(StateVector::new(self.space.clone(), lo, coeffs))
    }
}

fn complex_normal(rng: &mut dyn RngCore) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

impl UnitaryPair for DyadicPair {
    fn label(&self) -> &str {
        &self.label
    }

    fn space(&self) -> &Arc<ModelSpace> {
        &self.space
    }

    fn tolerance(&self) -> f64 {
        self.tolerance
    }

    fn tau_pow(&self, v: &StateVector, n: i64) -> Result<StateVector> {
        v.same_space(&StateVector::zero(self.space.clone()))?;
        let v = v.clone().trimmed();
        if n == 0 || v.is_empty() {
            return Ok(v);
        }
        let shift = n
            .checked_mul(self.cells_per_unit())
            .ok_or(MraError::WindowOverflow {
                generator: Generator::Tau,
                exponent: n,
                lo: i64::MIN,
                hi: i64::MAX,
            })?;
        let (lo, hi) = (v.offset() + shift, v.end() + shift);
        self.check_window(Generator::Tau, n, lo, hi)?;
        Ok(StateVector::new(self.space.clone(), lo, v.into_coeffs()))
    }

    fn pi_pow(&self, v: &StateVector, n: i64) -> Result<StateVector> {
        v.same_space(&StateVector::zero(self.space.clone()))?;
        let v = v.clone().trimmed();
        if n == 0 || v.is_empty() {
            return Ok(v);
        }
        if n.abs() > MAX_DILATION {
            return Err(MraError::WindowOverflow {
                generator: Generator::Pi,
                exponent: n,
                lo: self.space.extent.0,
                hi: self.space.extent.1,
            });
        }
        if n > 0 {
            self.contract(&v, n)
        } else {
            self.expand(&v, -n)
        }
    }

    fn random_vector(&self, rng: &mut dyn RngCore, refinable: u32) -> StateVector {
        let block = 1i64 << refinable.min(30);
        let (lo, hi) = (
            -self.trial_half_width * self.cells_per_unit(),
            self.trial_half_width * self.cells_per_unit(),
        );
        let first = lo.div_euclid(block);
        let last = (hi + block - 1).div_euclid(block);
        let mut coeffs = Vec::with_capacity(((last - first) * block) as usize);
        for _ in first..last {
            let c = complex_normal(rng);
            coeffs.extend(std::iter::repeat_n(c, block as usize));
        }
        StateVector::new(self.space.clone(), first * block, coeffs).normalized()
    }

    fn test_basis(&self, refinable: u32) -> Vec<StateVector> {
        let block = 1i64 << refinable.min(30);
        let (lo, hi) = (
            -self.trial_half_width * self.cells_per_unit(),
            self.trial_half_width * self.cells_per_unit(),
        );
        let first = lo.div_euclid(block);
        let last = (hi + block - 1).div_euclid(block);
        (first..last)
            .map(|i| {
                StateVector::new(
                    self.space.clone(),
                    i * block,
                    vec![Complex64::new(1.0, 0.0); block as usize],
                )
                .normalized()
            })
            .collect()
    }

    fn support(&self, v: &StateVector) -> Option<(f64, f64)> {
        let v = v.clone().trimmed();
        if v.is_empty() {
            return None;
        }
        let h = self.spacing();
        Some((v.offset() as f64 * h, v.end() as f64 * h))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::trial_rng;

    fn pair() -> DyadicPair {
        DyadicPair::new("grid", SpaceKind::DyadicLine, 3, 16, 1e-12, "midpoint").unwrap()
    }

    #[test]
    fn translation_and_dilation_of_unit_indicator() {
        let p = pair();
        let phi = p.indicator(0.0, 1.0, 1.0).unwrap();
        let t = p.tau_pow(&phi, 2).unwrap();
        assert_eq!((t.offset(), t.end()), (16, 24));
        let d = p.pi_pow(&phi, 1).unwrap();
        let expect = p.indicator(0.0, 0.5, 2f64.sqrt()).unwrap();
        assert!(d.distance(&expect).unwrap() < 1e-15);
        let e = p.pi_pow(&phi, -2).unwrap();
        let expect = p.indicator(0.0, 4.0, 0.5).unwrap();
        assert!(e.distance(&expect).unwrap() < 1e-15);
        assert!((e.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn overflow_and_resolution_errors() {
        let p = pair();
        let phi = p.indicator(0.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            p.tau_pow(&phi, 16),
            Err(MraError::WindowOverflow { generator: Generator::Tau, exponent: 16, .. })
        ));
        assert!(matches!(
            p.pi_pow(&phi, -5),
            Err(MraError::WindowOverflow { generator: Generator::Pi, exponent: -5, .. })
        ));
        let cell = StateVector::unit(p.space().clone(), 0);
        assert!(matches!(
            p.pi_pow(&cell, 1),
            Err(MraError::ResolutionOverflow { .. })
        ));
    }

    #[test]
    fn random_vectors_survive_refinement() {
        let p = pair();
        let v = p.random_vector(&mut trial_rng(1, 0), 3);
        assert!((v.norm() - 1.0).abs() < 1e-14);
        let w = p.pi_pow(&v, 3).unwrap();
        assert!((w.norm() - 1.0).abs() < 1e-13);
        assert!(p.pi_pow(&w, 1).is_err());
        assert_eq!(p.test_basis(3).len(), 2);
    }
}
