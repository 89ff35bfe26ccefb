//! Synthetic finite-dimensional instances with a known scaling vector.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};

use crate::engine::Filter;
use crate::error::Result;
use crate::models::FinitePair;
use crate::operators::trial_rng;

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn random_unitary(n: usize, rng: &mut dyn RngCore) -> DMatrix<Complex64> {
    let z = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    let (q, r) = z.qr().unpack();
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Unitary whose first column is `v / ‖v‖`.
fn unitary_with_first_column(v: &DVector<Complex64>, rng: &mut dyn RngCore) -> DMatrix<Complex64> {
    let n = v.len();
    let mut m = random_unitary(n, rng);
    m.set_column(0, &(v / Complex64::new(v.norm(), 0.0)));
    let (q, r) = m.qr().unpack();
    let mut q = q;
    let d = r[(0, 0)];
    let phase = d / d.norm();
    let mut col = q.column_mut(0);
    col *= phase;
    q
}

#[derive(Clone, Debug)]
pub struct ScalingFixture {
    pub pair: FinitePair,
    pub h: Filter,
    /// Coordinates of the planted `Φ` in the eigenbasis of `τ`.
    pub c: Vec<Complex64>,
    pub phi: Vec<Complex64>,
}

/// Four-dimensional instance: `τ` has eigenvalues `e^{iβ}{1, i, −1, −i}`
/// (moduli `γ_l = 1/4`), `h = (1/√2, 1/√2)` and `π` is built so that the
/// planted `c` satisfies `c = λc`. `π` does not satisfy `τπ = πτ²`.
pub fn four_dim_fixture(seed: u64) -> Result<ScalingFixture> {
    let mut rng = trial_rng(seed, 0);
    let n = 4;
    let beta = 0.3;
    let t: Vec<Complex64> = (0..n)
        .map(|l| Complex64::from_polar(1.0, beta + std::f64::consts::FRAC_PI_2 * l as f64))
        .collect();
    let s = 0.5f64.sqrt();
    let h = Filter::from_real(0, &[s, s]);
    let c = DVector::from_iterator(
        n,
        (0..n).map(|_| Complex64::from_polar(0.5, rng.random_range(0.0..std::f64::consts::TAU))),
    );
    let q: Vec<Complex64> = t.iter().map(|&tl| h.coeffs[0] + h.coeffs[1] * tl).collect();
    let w = DVector::from_iterator(n, (0..n).map(|l| q[l] * c[l]));
    // Π w = c: map w to c, then mix the complement of c.
    let a = unitary_with_first_column(&w, &mut rng);
    let b = unitary_with_first_column(&c, &mut rng);
    let mut mix = DMatrix::<Complex64>::identity(n, n);
    let v = random_unitary(n - 1, &mut rng);
    mix.view_mut((1, 1), (n - 1, n - 1)).copy_from(&v);
    let big_pi = &b * mix * b.adjoint() * &b * a.adjoint();
    let basis = random_unitary(n, &mut rng);
    let tau = &basis * DMatrix::from_diagonal(&DVector::from_vec(t)) * basis.adjoint();
    let pi = &basis * big_pi * basis.adjoint();
    let phi = &basis * &c;
    let pair = FinitePair::from_matrices("fixture4", tau, pi, 1e-8)?;
    Ok(ScalingFixture {
        pair,
        h,
        c: c.iter().copied().collect(),
        phi: phi.iter().copied().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::inner_product;
    use crate::operators::UnitaryPair;

    #[test]
    fn random_unitaries_are_unitary() {
        let mut rng = trial_rng(5, 2);
        let u = random_unitary(5, &mut rng);
        let d = u.adjoint() * &u - DMatrix::<Complex64>::identity(5, 5);
        assert!(d.iter().all(|z| z.norm() < 1e-13));
    }

    #[test]
    fn planted_vector_is_a_fixed_point_with_orthonormal_translates() {
        let f = four_dim_fixture(9).unwrap();
        let phi = f.pair.vector(&f.phi).unwrap();
        assert!((phi.norm() - 1.0).abs() < 1e-13);
        // refinement identity by direct operator application
        let mut refined = f.pair.vector(&[Complex64::new(0.0, 0.0); 4]).unwrap();
        for (n, hn) in f.h.indices().zip(&f.h.coeffs) {
            let term = f.pair.pi_tau(&phi, 1, n).unwrap().scaled(*hn);
            refined = refined.add(&term).unwrap();
        }
        assert!(refined.distance(&phi).unwrap() < 1e-12);
        for k in 1..4 {
            let g = inner_product(&phi, &f.pair.tau_pow(&phi, k).unwrap()).unwrap();
            assert!(g.norm() < 1e-12, "k = {k}");
        }
        for cl in &f.c {
            assert!((cl.norm_sqr() - 0.25).abs() < 1e-14);
        }
    }
}
