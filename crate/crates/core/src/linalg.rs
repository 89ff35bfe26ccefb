//! Small dense linear-algebra helpers over `nalgebra`.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Singular values in decreasing order.
pub fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// `σ_max / σ_min`, infinite for a singular matrix.
pub fn condition_from_singular_values(s: &[f64]) -> f64 {
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

pub fn condition_estimate(m: &DMatrix<Complex64>) -> f64 {
    condition_from_singular_values(&singular_values(m))
}

/// Largest entry modulus.
pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_singular_values() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(0.0, 3.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.5, 0.0),
        ]));
        let s = singular_values(&m);
        assert!((s[0] - 3.0).abs() < 1e-14 && (s[2] - 0.5).abs() < 1e-14);
        assert!((condition_estimate(&m) - 6.0).abs() < 1e-12);
        assert_eq!(condition_estimate(&DMatrix::zeros(2, 2)), f64::INFINITY);
    }
}
