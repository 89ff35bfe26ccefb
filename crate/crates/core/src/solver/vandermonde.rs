//! Björck–Pereyra elimination for `Σ_j x_j^i z_j = b_i`, `i = 0…n`.

use num_complex::Complex64;

/// Solves the primal Vandermonde system `V z = b` with `V_{ij} = x_j^i` in
/// `O(n²)` operations. Nodes must be pairwise distinct.
pub fn solve_primal(nodes: &[Complex64], rhs: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(nodes.len(), rhs.len(), "node and right-hand side lengths differ");
    let mut b = rhs.to_vec();
    if b.is_empty() {
        return b;
    }
    let n = b.len() - 1;
    let x = nodes;
    for k in 0..n {
        for i in (k + 1..=n).rev() {
            b[i] = b[i] - x[k] * b[i - 1];
        }
    }
    for k in (0..n).rev() {
        for i in k + 1..=n {
            b[i] /= x[i] - x[i - k - 1];
        }
        for i in k..n {
            b[i] = b[i] - b[i + 1];
        }
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    fn lu_oracle(nodes: &[Complex64], rhs: &[Complex64]) -> Vec<Complex64> {
        let n = nodes.len();
        let v = DMatrix::from_fn(n, n, |i, j| nodes[j].powu(i as u32));
        v.lu().solve(&DVector::from_column_slice(rhs)).unwrap().iter().copied().collect()
    }

    #[test]
    fn small_cases() {
        let one = [Complex64::new(1.0, 0.0)];
        assert_eq!(solve_primal(&one, &one), vec![Complex64::new(1.0, 0.0)]);
        let t = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        let g = solve_primal(&t, &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        assert!((g[0] - 0.5).norm() < 1e-15 && (g[1] - 0.5).norm() < 1e-15);
    }

    proptest! {
        #[test]
        fn agrees_with_lu_on_unimodular_nodes(
            phases in proptest::collection::vec(0.0f64..1.0, 1..8),
            rhs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8),
        ) {
            // spread nodes so they stay distinct
            let n = phases.len();
            let nodes: Vec<Complex64> = phases
                .iter()
                .enumerate()
                .map(|(i, p)| Complex64::from_polar(1.0, std::f64::consts::TAU * (i as f64 + 0.8 * p) / n as f64))
                .collect();
            let b: Vec<Complex64> = rhs[..n].iter().map(|&(a, c)| Complex64::new(a, c)).collect();
            let z = solve_primal(&nodes, &b);
            let oracle = lu_oracle(&nodes, &b);
            for (a, o) in z.iter().zip(&oracle) {
                prop_assert!((a - o).norm() < 1e-8 * (1.0 + o.norm()));
            }
        }
    }
}
