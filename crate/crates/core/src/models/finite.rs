//! Finite-dimensional unitary pairs given by dense matrices, including the
//! `C²` pair `τ = e^{i(2π/3) b̂·σ}`, `π = i e^{ia₀} â·σ`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{MraError, Result};
use crate::hilbert::{ModelSpace, StateVector};
use crate::operators::UnitaryPair;

const UNITARITY_TOL: f64 = 1e-12;
/// Largest order searched when reducing exponents.
const MAX_ORDER: u64 = 64;

#[derive(Clone, Debug)]
pub struct FinitePair {
    space: Arc<ModelSpace>,
    label: String,
    tau: DMatrix<Complex64>,
    pi: DMatrix<Complex64>,
    /// Smallest `p ≤ MAX_ORDER` with `τ^p = I`, if any.
    tau_order: Option<u64>,
    pi_order: Option<u64>,
    tolerance: f64,
}

fn unitarity_defect(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    (m.adjoint() * m - DMatrix::<Complex64>::identity(n, n))
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max)
}

/// Smallest `p ≤ MAX_ORDER` with `m^p = I` to within `1e-13`.
fn finite_order(m: &DMatrix<Complex64>) -> Option<u64> {
    let n = m.nrows();
    let id = DMatrix::<Complex64>::identity(n, n);
    let mut acc = m.clone();
    for p in 1..=MAX_ORDER {
        if (&acc - &id).iter().all(|c| c.norm() < 1e-13) {
            return Some(p);
        }
        acc = &acc * m;
    }
    None
}

fn reduce(n: i64, order: Option<u64>) -> i64 {
    match order {
        Some(p) => n.rem_euclid(p as i64),
        None => n,
    }
}

/// `m^n` by repeated squaring; negative powers use the adjoint.
pub fn unitary_power(m: &DMatrix<Complex64>, n: i64) -> DMatrix<Complex64> {
    let dim = m.nrows();
    let mut base = if n < 0 { m.adjoint() } else { m.clone() };
    let mut e = n.unsigned_abs();
    let mut acc = DMatrix::<Complex64>::identity(dim, dim);
    while e > 0 {
        if e & 1 == 1 {
            acc = &acc * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    acc
}

impl FinitePair {
    /// Wraps two square unitaries of equal size.
    pub fn from_matrices(
        label: impl Into<String>,
        tau: DMatrix<Complex64>,
        pi: DMatrix<Complex64>,
        tolerance: f64,
    ) -> Result<Self> {
        let n = tau.nrows();
        if n == 0 || tau.ncols() != n || pi.nrows() != n || pi.ncols() != n {
            return Err(MraError::Config("τ and π must be square of equal size".into()));
        }
        for (name, m) in [("tau", &tau), ("pi", &pi)] {
            let d = unitarity_defect(m);
            if d > UNITARITY_TOL {
                return Err(MraError::Config(format!("{name} is not unitary (defect {d:e})")));
            }
        }
        let label = label.into();
        let space = ModelSpace::finite(format!("{label}-C{n}"), n)?;
        Ok(FinitePair {
            space,
            label,
            tau_order: finite_order(&tau),
            pi_order: finite_order(&pi),
            tau,
            pi,
            tolerance,
        })
    }

    pub fn dim(&self) -> usize {
        self.tau.nrows()
    }

    pub fn tau_matrix(&self) -> &DMatrix<Complex64> {
        &self.tau
    }

    pub fn pi_matrix(&self) -> &DMatrix<Complex64> {
        &self.pi
    }

    /// Largest entry of `|τπ − πτ²|`.
    pub fn commutation_defect(&self) -> f64 {
        let lhs = &self.tau * &self.pi;
        let rhs = &self.pi * &self.tau * &self.tau;
        (lhs - rhs).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn vector(&self, values: &[Complex64]) -> Result<StateVector> {
        if values.len() != self.dim() {
            return Err(MraError::Config(format!(
                "expected {} components, got {}",
                self.dim(),
                values.len()
            )));
        }
        Ok(StateVector::new(self.space.clone(), 0, values.to_vec()))
    }

    pub fn to_dvector(&self, v: &StateVector) -> Result<DVector<Complex64>> {
        v.same_space(&StateVector::zero(self.space.clone()))?;
        Ok(DVector::from_iterator(self.dim(), (0..self.dim() as i64).map(|i| v.get(i))))
    }

    fn apply(&self, m: &DMatrix<Complex64>, v: &StateVector) -> Result<StateVector> {
        let x = self.to_dvector(v)?;
        let y = m * x;
        Ok(StateVector::new(self.space.clone(), 0, y.iter().copied().collect()))
    }
}

impl UnitaryPair for FinitePair {
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
        self.apply(&unitary_power(&self.tau, reduce(n, self.tau_order)), v)
    }

    fn pi_pow(&self, v: &StateVector, n: i64) -> Result<StateVector> {
        self.apply(&unitary_power(&self.pi, reduce(n, self.pi_order)), v)
    }

    fn random_vector(&self, rng: &mut dyn RngCore, _refinable: u32) -> StateVector {
        let coeffs = (0..self.dim())
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re, im)
            })
            .collect();
        StateVector::new(self.space.clone(), 0, coeffs).normalized()
    }

    fn test_basis(&self, _refinable: u32) -> Vec<StateVector> {
        (0..self.dim() as i64)
            .map(|i| StateVector::unit(self.space.clone(), i))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct FiniteModel {
    pub space: Arc<ModelSpace>,
    pub pair: Arc<FinitePair>,
}

fn pauli_dot(n: [f64; 3]) -> DMatrix<Complex64> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    DMatrix::from_row_slice(
        2,
        2,
        &[c(n[2], 0.0), c(n[0], -n[1]), c(n[0], n[1]), c(-n[2], 0.0)],
    )
}

/// The `C²` pair for orthonormal axes `â`, `b̂` and phase `a₀`.
pub fn make_finite_pair_model(a_hat: [f64; 3], b_hat: [f64; 3], a0: f64) -> Result<FiniteModel> {
    let norm = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let dot = a_hat[0] * b_hat[0] + a_hat[1] * b_hat[1] + a_hat[2] * b_hat[2];
    if (norm(a_hat) - 1.0).abs() > 1e-12 || (norm(b_hat) - 1.0).abs() > 1e-12 || dot.abs() > 1e-12 {
        return Err(MraError::Config(format!(
            "axes must be orthonormal (|a| = {}, |b| = {}, a·b = {dot})",
            norm(a_hat),
            norm(b_hat)
        )));
    }
    let theta = 2.0 * std::f64::consts::PI / 3.0;
    let identity = DMatrix::<Complex64>::identity(2, 2);
    let tau = identity * Complex64::new(theta.cos(), 0.0) + pauli_dot(b_hat) * Complex64::new(0.0, theta.sin());
    let pi = pauli_dot(a_hat) * (Complex64::i() * Complex64::from_polar(1.0, a0));
    let pair = FinitePair::from_matrices("c2", tau, pi, 1e-14)?;
    Ok(FiniteModel {
        space: pair.space.clone(),
        pair: Arc::new(pair),
    })
}

/// The one-dimensional model `τ = π = (1)`, `Φ = (1)`.
pub fn make_unit_model() -> Result<(FiniteModel, StateVector)> {
    let one = DMatrix::<Complex64>::identity(1, 1);
    let pair = FinitePair::from_matrices("unit", one.clone(), one, 1e-14)?;
    let phi = pair.vector(&[Complex64::new(1.0, 0.0)])?;
    Ok((
        FiniteModel {
            space: pair.space.clone(),
            pair: Arc::new(pair),
        },
        phi,
    ))
}
