//! Warped Haar model on `L²(0, 1)` with the logistic warp
//! `v(x) = log(x/(1−x))`.
//!
//! Vectors are stored in `u = v(x)` coordinates through the unitary
//! `(Wφ)(u) = φ(v⁻¹(u)) √(v⁻¹'(u))`, where `τ` and `π` become the exact
//! Haar shift and dilation. The x-space maps are exposed as views.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{MraError, Result};
use crate::hilbert::{ModelSpace, SpaceKind, StateVector, Tolerances};
use crate::models::dyadic::DyadicPair;
use crate::operators::UnitaryPair;
use crate::quadrature::GaussLegendre;

/// The logistic map pair `v`, `v⁻¹`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WarpMap;

impl WarpMap {
    pub fn v(&self, x: f64) -> f64 {
        (x / (1.0 - x)).ln()
    }

    pub fn v_inv(&self, u: f64) -> f64 {
        1.0 / (1.0 + (-u).exp())
    }

    /// `(v⁻¹)'(u) = x(1 − x)` at `x = v⁻¹(u)`.
    pub fn v_inv_prime(&self, u: f64) -> f64 {
        let x = self.v_inv(u);
        x * (1.0 - x)
    }
}

/// `S_{j,k} = [v⁻¹(2^j k), v⁻¹(2^j (k+1)))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WarpCell {
    pub j: i32,
    pub k: i64,
    pub lo: f64,
    pub hi: f64,
}

impl WarpCell {
    pub fn new(map: &WarpMap, j: i32, k: i64) -> Self {
        let s = 2f64.powi(j);
        WarpCell {
            j,
            k,
            lo: map.v_inv(s * k as f64),
            hi: map.v_inv(s * (k + 1) as f64),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x < self.hi
    }
}

#[derive(Clone, Debug)]
pub struct WarpedModel {
    pub space: Arc<ModelSpace>,
    pub pair: Arc<DyadicPair>,
    /// `ρ = 1/√(x(1−x))` on `S_{0,0}`.
    pub rho: StateVector,
    pub map: WarpMap,
}

/// `L` is the u-space grid level, `K` the u-space half extent.
pub fn make_warped_interval_model(level: u32, half_extent: i64) -> Result<WarpedModel> {
    if level < 1 {
        return Err(MraError::Config("warped model needs level >= 1".into()));
    }
    if half_extent < 4 {
        return Err(MraError::Config(format!(
            "extent {half_extent} too small for a two-scale application (need >= 4)"
        )));
    }
    let pair = DyadicPair::new(
        "warped",
        SpaceKind::UnitIntervalWarped,
        level,
        half_extent,
        Tolerances::default().quadrature,
        "u-space-exact",
    )?;
    let rho = pair.indicator(0.0, 1.0, 1.0)?;
    Ok(WarpedModel {
        space: pair.space().clone(),
        pair: Arc::new(pair),
        rho,
        map: WarpMap,
    })
}

fn check_interior(x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(MraError::DomainBoundary(x))
    }
}

impl WarpedModel {
    pub fn cell(&self, j: i32, k: i64) -> WarpCell {
        WarpCell::new(&self.map, j, k)
    }

    /// x-space value `φ(x) = (Wφ)(v(x)) / √(x(1−x))`.
    pub fn eval_x(&self, v: &StateVector, x: f64) -> Result<Complex64> {
        check_interior(x)?;
        let u = self.map.v(x);
        Ok(self.pair.value_at(v, u) / (x * (1.0 - x)).sqrt())
    }

    /// Lifts an x-space function to the carrier by sampling at u-cell
    /// midpoints over u in `[a, b)`.
    pub fn from_x_function<F: Fn(f64) -> Complex64>(&self, a: f64, b: f64, f: F) -> Result<StateVector> {
        self.pair.sample(a, b, |u| {
            let x = self.map.v_inv(u);
            f(x) * (x * (1.0 - x)).sqrt()
        })
    }

    /// `∫_0^1 φ conj(χ) dx` by Gauss–Legendre quadrature in x over the
    /// image of each u-cell.
    pub fn quadrature_inner_product(&self, a: &StateVector, b: &StateVector) -> Result<Complex64> {
        a.same_space(b)?;
        let lo = a.offset().max(b.offset());
        let hi = a.end().min(b.end());
        let rule = GaussLegendre::new(12);
        let h = self.pair.spacing();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in lo..hi {
            let (x0, x1) = (self.map.v_inv(i as f64 * h), self.map.v_inv((i + 1) as f64 * h));
            let xm = 0.5 * (x0 + x1);
            let (fa, fb) = (self.eval_x(a, xm)?, self.eval_x(b, xm)?);
            let c = fa * fb.conj() * (xm * (1.0 - xm));
            let w = rule.integrate(x0, x1, |x| 1.0 / (x * (1.0 - x)));
            acc += c * w;
        }
        Ok(acc)
    }

    /// `π^{-l} τ^k ρ = 2^{-l/2} / √(x(1−x))` on `S_{l,k}`, zero elsewhere.
    pub fn rho_closed_form(&self, l: i32, k: i64, x: f64) -> Result<f64> {
        check_interior(x)?;
        if self.cell(l, k).contains(x) {
            Ok(2f64.powf(-0.5 * l as f64) / (x * (1.0 - x)).sqrt())
        } else {
            Ok(0.0)
        }
    }

    /// Standard mother wavelet: `+1/√(x(1−x))` on `S_{−1,−1}`,
    /// `−1/√(x(1−x))` on `S_{−1,−2}`.
    pub fn psi_closed_form(&self, x: f64) -> Result<f64> {
        check_interior(x)?;
        let w = 1.0 / (x * (1.0 - x)).sqrt();
        if self.cell(-1, -1).contains(x) {
            Ok(w)
        } else if self.cell(-1, -2).contains(x) {
            Ok(-w)
        } else {
            Ok(0.0)
        }
    }
}

/// `(τf)(x) = f(x / (x(1−e) + e)) √e / (x(1−e) + e)`.
pub fn tau_x<F: Fn(f64) -> Complex64>(f: F, x: f64) -> Result<Complex64> {
    check_interior(x)?;
    let e = std::f64::consts::E;
    let d = x * (1.0 - e) + e;
    Ok(f(x / d) * (e.sqrt() / d))
}

/// `(τ⁻¹f)(x) = f(ex / (1 + x(e−1))) √e / (1 + x(e−1))`.
pub fn tau_inv_x<F: Fn(f64) -> Complex64>(f: F, x: f64) -> Result<Complex64> {
    check_interior(x)?;
    let e = std::f64::consts::E;
    let d = 1.0 + x * (e - 1.0);
    Ok(f(e * x / d) * (e.sqrt() / d))
}

/// `(πf)(x) = √2 f(x² / (x² + (1−x)²)) √(x(1−x)) / (x² + (1−x)²)`.
pub fn pi_x<F: Fn(f64) -> Complex64>(f: F, x: f64) -> Result<Complex64> {
    check_interior(x)?;
    let d = x * x + (1.0 - x) * (1.0 - x);
    Ok(f(x * x / d) * (2f64.sqrt() * (x * (1.0 - x)).sqrt() / d))
}

/// `(π⁻¹f)(x) = f(y) √(y(1−y)/(2 x(1−x)))` with `y = √x / (√x + √(1−x))`.
pub fn pi_inv_x<F: Fn(f64) -> Complex64>(f: F, x: f64) -> Result<Complex64> {
    check_interior(x)?;
    let (a, b) = (x.sqrt(), (1.0 - x).sqrt());
    let y = a / (a + b);
    Ok(f(y) * (y * (1.0 - y) / (2.0 * x * (1.0 - x))).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::inner_product;

    fn model() -> WarpedModel {
        make_warped_interval_model(4, 16).unwrap()
    }

    fn interior_points(n: usize) -> Vec<f64> {
        (0..n).map(|i| (i as f64 + 0.37) / n as f64).collect()
    }

    #[test]
    fn warp_map_round_trip() {
        let m = WarpMap;
        assert_eq!(m.v_inv(0.0), 0.5);
        for x in interior_points(50) {
            assert!((m.v_inv(m.v(x)) - x).abs() < 1e-12);
        }
        for w in interior_points(50).windows(2) {
            assert!(m.v_inv(m.v(w[0])) < m.v_inv(m.v(w[1])));
        }
    }

    #[test]
    fn cells_are_disjoint_and_ordered() {
        let m = WarpMap;
        for j in -2..=2 {
            let cells: Vec<WarpCell> = (-6..6).map(|k| WarpCell::new(&m, j, k)).collect();
            for pair in cells.windows(2) {
                assert!(pair[0].hi <= pair[1].lo);
                assert!(pair[0].lo < pair[0].hi);
            }
        }
        let wide = WarpCell::new(&m, 1, 0);
        let narrow = WarpCell::new(&m, -1, 0);
        assert!(narrow.hi - narrow.lo < wide.hi - wide.lo);
    }

    #[test]
    fn rho_is_normalised_in_both_representations() {
        let m = model();
        assert!((m.rho.norm() - 1.0).abs() < 1e-15);
        let q = m.quadrature_inner_product(&m.rho, &m.rho).unwrap();
        assert!((q.re - 1.0).abs() < 1e-12);
        // closed-form integral of 1/(x(1−x)) over S_{0,0} is v(hi) − v(lo) = 1
        let c = m.cell(0, 0);
        assert!((m.map.v(c.hi) - m.map.v(c.lo) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evaluation_rejects_the_boundary() {
        let m = model();
        assert!(matches!(m.eval_x(&m.rho, 0.0), Err(MraError::DomainBoundary(_))));
        assert!(matches!(m.eval_x(&m.rho, 1.0), Err(MraError::DomainBoundary(_))));
    }

    #[test]
    fn dilated_translates_match_closed_form() {
        let m = model();
        for l in 0..=2 {
            for k in -2..=2 {
                let v = m.pair.pi_pow(&m.pair.tau_pow(&m.rho, k).unwrap(), -(l as i64)).unwrap();
                let c = m.cell(l, k);
                let mut points = interior_points(10);
                points.extend((0..5).map(|i| c.lo + (c.hi - c.lo) * (i as f64 + 0.5) / 5.0));
                for x in points {
                    let got = m.eval_x(&v, x).unwrap();
                    let want = m.rho_closed_form(l, k, x).unwrap();
                    assert!((got.re - want).abs() < 1e-8 * want.abs().max(1.0) && got.im == 0.0);
                }
            }
        }
    }

    #[test]
    fn x_space_maps_are_conjugate_to_carrier_operators() {
        let m = model();
        let v = m
            .from_x_function(-2.0, 2.0, |x| Complex64::new(x.sin(), x * x))
            .unwrap();
        let f = |y: f64| m.eval_x(&v, y).unwrap_or_default();
        let tv = m.pair.tau_apply(&v).unwrap();
        let tiv = m.pair.tau_inverse(&v).unwrap();
        let pv = m.pair.pi_apply(&m.pair.pi_inverse(&v).unwrap()).unwrap();
        let piv = m.pair.pi_inverse(&v).unwrap();
        for x in interior_points(40) {
            // sample away from cell edges, where the piecewise representation jumps
            let u = m.map.v(x);
            let h = m.pair.spacing();
            let frac = (u / h).rem_euclid(1.0);
            if !(0.3..0.7).contains(&frac) {
                continue;
            }
            assert!((tau_x(f, x).unwrap() - m.eval_x(&tv, x).unwrap()).norm() < 1e-8);
            assert!((tau_inv_x(f, x).unwrap() - m.eval_x(&tiv, x).unwrap()).norm() < 1e-8);
            assert!((pi_inv_x(f, x).unwrap() - m.eval_x(&piv, x).unwrap()).norm() < 1e-8);
            assert!((m.eval_x(&pv, x).unwrap() - f(x)).norm() < 1e-12);
        }
        let _ = pi_x(f, 0.5).unwrap();
    }

    #[test]
    fn pi_x_matches_carrier_on_refinable_vector() {
        let m = model();
        let v = m.pair.indicator(-1.0, 0.5, 0.8).unwrap();
        let pv = m.pair.pi_apply(&v).unwrap();
        let f = |y: f64| m.eval_x(&v, y).unwrap_or_default();
        for x in interior_points(33) {
            assert!((pi_x(f, x).unwrap() - m.eval_x(&pv, x).unwrap()).norm() < 1e-8);
        }
    }

    #[test]
    fn quadrature_inner_product_agrees_with_u_space() {
        let m = model();
        let a = m.pair.indicator(-0.5, 1.5, 0.7).unwrap();
        let b = m.pair.pi_inverse(&m.rho).unwrap();
        let exact = inner_product(&a, &b).unwrap();
        let quad = m.quadrature_inner_product(&a, &b).unwrap();
        assert!((exact - quad).norm() < 1e-12);
    }
}
