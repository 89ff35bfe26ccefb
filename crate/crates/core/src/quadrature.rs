//! Gauss–Legendre quadrature, fixed-order and adaptive.

use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Rule with `n` nodes on `[-1, 1]`; nodes found by Newton iteration on
    /// the three-term Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Integrates a vector-valued integrand: `f(x, out)` fills `out`, and the
    /// integrals are accumulated into `acc`.
    pub fn integrate_into<F: FnMut(f64, &mut [f64])>(&self, a: f64, b: f64, acc: &mut [f64], mut f: F) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut buf = vec![0.0; acc.len()];
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            f(mid + half * x, &mut buf);
            for (a, b) in acc.iter_mut().zip(&buf) {
                *a += w * half * b;
            }
        }
    }

    /// Adaptive bisection: a panel is accepted when the rule on the panel
    /// agrees with the sum over its two halves within `tol`.
    pub fn integrate_adaptive<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, tol: f64, f: F) -> f64 {
        let mut f = f;
        let whole = self.integrate(a, b, &mut f);
        self.refine(a, b, whole, tol, 48, &mut f)
    }

    fn refine<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, whole: f64, tol: f64, depth: u32, f: &mut F) -> f64 {
        let mid = 0.5 * (a + b);
        let left = self.integrate(a, mid, &mut *f);
        let right = self.integrate(mid, b, &mut *f);
        let split = left + right;
        if depth == 0 || (split - whole).abs() <= tol.max(1e-15 * split.abs()) {
            return split;
        }
        self.refine(a, mid, left, 0.5 * tol, depth - 1, f)
            + self.refine(mid, b, right, 0.5 * tol, depth - 1, f)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two_and_polynomials_are_exact() {
        for n in [1, 2, 5, 16, 31] {
            let rule = GaussLegendre::new(n);
            let s: f64 = rule.weights().iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n = {n}");
            // exact through degree 2n - 1
            let deg = 2 * n - 1;
            let got = rule.integrate(0.0, 1.0, |x| x.powi(deg as i32));
            assert!((got - 1.0 / (deg as f64 + 1.0)).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn adaptive_handles_near_singular_integrand() {
        let rule = GaussLegendre::new(10);
        // ∫ dx / (x(1-x)) over [a, b] = log(b/(1-b)) - log(a/(1-a))
        let (a, b) = (1e-6f64, 0.5f64);
        let exact = (b / (1.0 - b)).ln() - (a / (1.0 - a)).ln();
        let got = rule.integrate_adaptive(a, b, 1e-13, |x| 1.0 / (x * (1.0 - x)));
        assert!((got - exact).abs() < 1e-10, "{got} vs {exact}");
    }
}
