//! Eigendecomposition of a finite-dimensional unitary `τ`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{MraError, Result};

/// Eigenvalues closer than this are treated as coincident.
pub const DEGENERACY_GAP: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub values: Vec<Complex64>,
    /// Unit eigenvectors as columns.
    pub vectors: DMatrix<Complex64>,
    /// `max_l ‖τφ_l − t_lφ_l‖`.
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexValue {
    fn from(z: Complex64) -> Self {
        ComplexValue { re: z.re, im: z.im }
    }
}

/// Complex Schur form `τ = Q T Q^H`; for a normal `τ` with distinct
/// eigenvalues `T` is diagonal and the columns of `Q` are eigenvectors.
pub fn eigensystem(tau: &DMatrix<Complex64>) -> Result<Eigensystem> {
    let n = tau.nrows();
    let (q, t) = tau.clone().schur().unpack();
    let values: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let mut collisions = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() < DEGENERACY_GAP {
                collisions.push((values[i], values[j]));
            }
        }
    }
    if !collisions.is_empty() {
        return Err(MraError::DegenerateSpectrum(collisions));
    }
    let residual = (0..n)
        .map(|l| {
            let phi = q.column(l);
            (tau * phi - phi * values[l]).norm()
        })
        .fold(0.0, f64::max);
    Ok(Eigensystem {
        values,
        vectors: q,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::fixtures::random_unitary;
    use crate::operators::trial_rng;

    #[test]
    fn diagonal_input() {
        let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let tau = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![w, w.conj()]));
        let e = eigensystem(&tau).unwrap();
        assert!((e.values[0] - w).norm() < 1e-14 && (e.values[1] - w.conj()).norm() < 1e-14);
        for l in 0..2 {
            assert!((e.vectors[(l, l)].norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn random_unitary_with_distinct_phases() {
        let mut rng = trial_rng(11, 0);
        let q = random_unitary(6, &mut rng);
        let phases: Vec<Complex64> = (0..6).map(|i| Complex64::from_polar(1.0, 0.3 + i as f64)).collect();
        let tau = &q * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(phases)) * q.adjoint();
        let e = eigensystem(&tau).unwrap();
        assert!(e.residual < 1e-10);
        for t in &e.values {
            assert!((t.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_spectrum_is_refused() {
        let tau = DMatrix::<Complex64>::identity(3, 3);
        assert!(matches!(eigensystem(&tau), Err(MraError::DegenerateSpectrum(v)) if v.len() == 3));
    }
}
