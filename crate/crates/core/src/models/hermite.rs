//! Hermite functions `ψ_n(x) = (2^n n! √π)^{-1/2} H_n(x) e^{-x²/2}`.

/// Fills `out[n] = ψ_n(x)` for `n < out.len()` with the normalised
/// three-term recurrence
/// `ψ_{n+1} = √(2/(n+1)) x ψ_n − √(n/(n+1)) ψ_{n−1}`.
pub fn hermite_functions(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let psi0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    out[0] = psi0;
    if out.len() == 1 {
        return;
    }
    out[1] = std::f64::consts::SQRT_2 * x * psi0;
    for n in 1..out.len() - 1 {
        let nf = n as f64;
        out[n + 1] = (2.0 / (nf + 1.0)).sqrt() * x * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
    }
}

/// Beyond this radius every `ψ_n`, `n < count`, is below `1e-30`.
pub fn negligible_radius(count: usize) -> f64 {
    (2.0 * count as f64 + 1.0).sqrt() + 12.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;

    #[test]
    fn low_orders_match_closed_forms() {
        let mut out = [0.0; 3];
        let x = 0.7f64;
        hermite_functions(x, &mut out);
        let g = (-0.5 * x * x).exp() * std::f64::consts::PI.powf(-0.25);
        assert!((out[0] - g).abs() < 1e-15);
        assert!((out[1] - 2f64.sqrt() * x * g).abs() < 1e-15);
        assert!((out[2] - (2.0 * x * x - 1.0) / 2f64.sqrt() * g).abs() < 1e-15);
    }

    #[test]
    fn orthonormal_under_quadrature() {
        let n = 40;
        let rule = GaussLegendre::new(32);
        let mut gram = vec![0.0; n * n];
        let r = negligible_radius(n);
        let panels = 200;
        let width = 2.0 * r / panels as f64;
        for p in 0..panels {
            let a = -r + p as f64 * width;
            rule.integrate_into(a, a + width, &mut gram, |x, out| {
                let mut h = vec![0.0; n];
                hermite_functions(x, &mut h);
                for i in 0..n {
                    for j in 0..n {
                        out[i * n + j] = h[i] * h[j];
                    }
                }
            });
        }
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((gram[i * n + j] - target).abs() < 1e-12, "({i},{j})");
            }
        }
    }
}
