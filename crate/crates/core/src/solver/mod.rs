//! Scaling vectors for finite-dimensional pairs from an eigenbasis of `τ`.
//!
//! Writing `Φ = Σ_l c_l φ_l` with `τφ_l = t_lφ_l`, orthonormality of the
//! translates becomes the moment system `Σ_l |c_l|² t_l^k = δ_{k,0}`
//! (solved for `γ_l = |c_l|²`), and the two-scale relation becomes the
//! fixed point `c = λc` with `λ_{k,l} = q_l Π_{k,l}`,
//! `q_l = Σ_n h_n t_l^n` and `Π_{k,l} = φ_k^H π φ_l`. Phases (and
//! optionally `h`) are searched by multi-start Levenberg–Marquardt.

pub mod eigen;
pub mod fixtures;
pub mod vandermonde;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::engine::{raw_tsr_coefficients, tsr_residual, Filter, ScalingSystem, Tap};
use crate::error::{MraError, Result};
use crate::hilbert::gram_deviation;
use crate::linalg;
use crate::models::FinitePair;
use crate::operators::{trial_rng, UnitaryPair};
use crate::par::{self, Execution};

pub use eigen::{eigensystem, ComplexValue, Eigensystem};

/// Largest dimension accepted by the moment solver.
pub const MAX_DIMENSION: usize = 64;
/// Condition estimate above which `E` is treated as singular.
pub const MAX_CONDITION: f64 = 1e13;
/// Success threshold for the fixed-point residual.
pub const RESIDUAL_THRESHOLD: f64 = 1e-8;
const REALITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct MomentSystem {
    pub eigenvalues: Vec<Complex64>,
    /// `E_{k,l} = t_l^k`, `k = 0…N−1`.
    pub e: DMatrix<Complex64>,
}

impl MomentSystem {
    pub fn new(eigenvalues: &[Complex64]) -> Result<Self> {
        let n = eigenvalues.len();
        if n == 0 || n > MAX_DIMENSION {
            return Err(MraError::Config(format!("dimension {n} outside 1..={MAX_DIMENSION}")));
        }
        let mut collisions = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if (eigenvalues[i] - eigenvalues[j]).norm() < eigen::DEGENERACY_GAP {
                    collisions.push((eigenvalues[i], eigenvalues[j]));
                }
            }
        }
        if !collisions.is_empty() {
            return Err(MraError::DegenerateSpectrum(collisions));
        }
        let e = DMatrix::from_fn(n, n, |k, l| eigenvalues[l].powu(k as u32));
        Ok(MomentSystem {
            eigenvalues: eigenvalues.to_vec(),
            e,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModuliSolution {
    pub gamma: Vec<ComplexValue>,
    pub condition_estimate: f64,
    /// `max_l |Im γ_l|`.
    pub imaginary_defect: f64,
    pub sum: ComplexValue,
    pub real: bool,
    pub nonnegative: bool,
    pub feasible: bool,
    pub reason: Option<String>,
}

impl ModuliSolution {
    pub fn gamma_values(&self) -> Vec<Complex64> {
        self.gamma.iter().map(|g| Complex64::new(g.re, g.im)).collect()
    }
}

/// `γ = E⁻¹u` by Björck–Pereyra elimination, with feasibility checks.
pub fn solve_moduli(sys: &MomentSystem) -> Result<ModuliSolution> {
    let n = sys.eigenvalues.len();
    let condition_estimate = linalg::condition_estimate(&sys.e);
    if !(condition_estimate < MAX_CONDITION) {
        return Err(MraError::Conditioning {
            condition: condition_estimate,
        });
    }
    let mut u = vec![Complex64::new(0.0, 0.0); n];
    u[0] = Complex64::new(1.0, 0.0);
    let gamma = vandermonde::solve_primal(&sys.eigenvalues, &u);
    let imaginary_defect = gamma.iter().map(|g| g.im.abs()).fold(0.0, f64::max);
    let sum: Complex64 = gamma.iter().sum();
    let real = imaginary_defect < REALITY_TOL;
    let nonnegative = gamma.iter().all(|g| g.re >= -REALITY_TOL);
    let sum_ok = (sum - 1.0).norm() < REALITY_TOL;
    let feasible = real && nonnegative && sum_ok;
    let reason = if !real {
        Some(format!("moduli are complex (max |Im γ| = {imaginary_defect:e})"))
    } else if !nonnegative {
        Some("negative modulus squared".into())
    } else if !sum_ok {
        Some(format!("moment row k = 0 violated (Σγ = {sum})"))
    } else {
        None
    };
    Ok(ModuliSolution {
        gamma: gamma.into_iter().map(ComplexValue::from).collect(),
        condition_estimate,
        imaginary_defect,
        sum: sum.into(),
        real,
        nonnegative,
        feasible,
        reason,
    })
}

/// How the two-scale coefficients enter the search.
#[derive(Clone, Debug, PartialEq)]
pub enum FilterMode {
    Fixed(Filter),
    /// Unknown complex `h_n` on `lo..=hi`.
    Free { lo: i64, hi: i64 },
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub attempts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// Extra moment orders reported beyond `N − 1`.
    pub diagnostic_orders: usize,
    pub exec: Execution,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            attempts: 32,
            seed: 0,
            max_iterations: 400,
            diagnostic_orders: 8,
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Validation {
    pub tsr_residual: f64,
    /// Gram deviation of `{τ^kΦ}`, `0 ≤ k ≤ N−1`.
    pub gram_deviation: f64,
    /// `max_n |⟨Φ, πτ^nΦ⟩ − h_n|` over the trial window.
    pub h_deviation: f64,
    /// `|⟨Φ, τ^kΦ⟩|` for `k = N…N+m−1`, informational.
    pub higher_moments: Vec<f64>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub model: String,
    pub dimension: usize,
    pub eigenvalues: Vec<ComplexValue>,
    pub gamma: Vec<ComplexValue>,
    pub condition_estimate: f64,
    pub feasible: bool,
    pub residual: Option<f64>,
    pub threshold: f64,
    pub attempts: usize,
    pub best_attempt: Option<usize>,
    pub best_theta: Option<Vec<f64>>,
    pub h: Option<Vec<Tap>>,
    pub phi: Option<Vec<ComplexValue>>,
    pub validation: Option<Validation>,
    /// `max |τπ − πτ²|`, informational.
    pub commutation_defect: f64,
    pub reason: Option<String>,
}

/// Unknowns: `θ` (N entries) followed by `Re h`, `Im h` when free.
struct Problem<'a> {
    t: &'a [Complex64],
    sqrt_gamma: Vec<f64>,
    big_pi: &'a DMatrix<Complex64>,
    fixed_h: Option<&'a Filter>,
    window: (i64, i64),
}

impl Problem<'_> {
    fn n(&self) -> usize {
        self.t.len()
    }

    fn width(&self) -> usize {
        (self.window.1 - self.window.0 + 1) as usize
    }

    fn params(&self) -> usize {
        self.n() + if self.fixed_h.is_some() { 0 } else { 2 * self.width() }
    }

    fn filter(&self, x: &[f64]) -> Filter {
        match self.fixed_h {
            Some(h) => h.clone(),
            None => {
                let w = self.width();
                let n = self.n();
                Filter::new(
                    self.window.0,
                    (0..w).map(|i| Complex64::new(x[n + i], x[n + w + i])).collect(),
                )
            }
        }
    }

    fn c(&self, x: &[f64]) -> DVector<Complex64> {
        DVector::from_iterator(self.n(), (0..self.n()).map(|l| Complex64::from_polar(self.sqrt_gamma[l], x[l])))
    }

    fn q(&self, h: &Filter) -> Vec<Complex64> {
        self.t
            .iter()
            .map(|&tl| h.indices().zip(&h.coeffs).map(|(n, hn)| hn * tl.powi(n as i32)).sum())
            .collect()
    }

    fn lambda(&self, q: &[Complex64]) -> DMatrix<Complex64> {
        let mut lam = self.big_pi.clone();
        for (l, ql) in q.iter().enumerate() {
            let mut col = lam.column_mut(l);
            col *= *ql;
        }
        lam
    }

    /// `r = c − λc`.
    fn residual(&self, x: &[f64]) -> DVector<Complex64> {
        let c = self.c(x);
        let lam = self.lambda(&self.q(&self.filter(x)));
        &c - lam * &c
    }

    fn real_residual(&self, x: &[f64]) -> DVector<f64> {
        let r = self.residual(x);
        let n = self.n();
        DVector::from_iterator(2 * n, r.iter().map(|z| z.re).chain(r.iter().map(|z| z.im)))
    }

    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.n();
        let c = self.c(x);
        let h = self.filter(x);
        let lam = self.lambda(&self.q(&h));
        let id_minus = DMatrix::<Complex64>::identity(n, n) - &lam;
        let mut jac = DMatrix::<f64>::zeros(2 * n, self.params());
        let mut put = |col: usize, v: &DVector<Complex64>| {
            for k in 0..n {
                jac[(k, col)] = v[k].re;
                jac[(n + k, col)] = v[k].im;
            }
        };
        for l in 0..n {
            let d = id_minus.column(l) * (Complex64::i() * c[l]);
            put(l, &d);
        }
        if self.fixed_h.is_none() {
            let w = self.width();
            for i in 0..w {
                let nn = self.window.0 + i as i64;
                let mut d = DVector::<Complex64>::zeros(n);
                for l in 0..n {
                    d -= self.big_pi.column(l) * (self.t[l].powi(nn as i32) * c[l]);
                }
                put(n + i, &d);
                put(n + w + i, &(d * Complex64::i()));
            }
        }
        jac
    }
}

struct Attempt {
    residual: f64,
    x: Vec<f64>,
}

fn levenberg_marquardt(problem: &Problem, mut x: Vec<f64>, max_iterations: usize) -> Attempt {
    let mut r = problem.real_residual(&x);
    let mut cost = r.norm_squared();
    let mut mu = 1e-3;
    let p = problem.params();
    for _ in 0..max_iterations {
        if cost.sqrt() < 1e-14 {
            break;
        }
        let jac = problem.jacobian(&x);
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let grad = &jt * &r;
        let mut improved = false;
        for _ in 0..12 {
            let mut a = jtj.clone();
            for i in 0..p {
                a[(i, i)] += mu * (1.0 + jtj[(i, i)]);
            }
            let Some(step) = a.cholesky().map(|ch| ch.solve(&(-&grad))) else {
                mu *= 10.0;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let rt = problem.real_residual(&trial);
            let ct = rt.norm_squared();
            if ct < cost {
                x = trial;
                r = rt;
                cost = ct;
                mu = (mu / 3.0).max(1e-12);
                improved = true;
                break;
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }
    Attempt {
        residual: cost.sqrt(),
        x,
    }
}

fn validate(pair: &FinitePair, phi: &crate::hilbert::StateVector, h: &Filter, diagnostic_orders: usize) -> Result<Validation> {
    let n = pair.dim();
    let shared: std::sync::Arc<dyn UnitaryPair> = std::sync::Arc::new(pair.clone());
    let sys = ScalingSystem {
        model: pair.label().to_string(),
        phi: phi.clone(),
        seed: phi.clone(),
        pair: shared,
        h: h.clone(),
        h_real: h.is_real(pair.tolerance()),
    };
    let tsr = tsr_residual(&sys)?;
    let translates = (0..n as i64)
        .map(|k| pair.tau_pow(phi, k))
        .collect::<Result<Vec<_>>>()?;
    let gram = gram_deviation(&translates)?;
    let extracted = raw_tsr_coefficients(phi, pair, h.indices())?;
    let h_deviation = h
        .indices()
        .map(|m| (extracted.get(m) - h.get(m)).norm())
        .fold(0.0, f64::max);
    let higher_moments = (n..n + diagnostic_orders)
        .map(|k| Ok(crate::hilbert::inner_product(phi, &pair.tau_pow(phi, k as i64)?)?.norm()))
        .collect::<Result<Vec<_>>>()?;
    let tol = RESIDUAL_THRESHOLD;
    Ok(Validation {
        passed: tsr < tol && gram < tol && h_deviation < tol,
        tsr_residual: tsr,
        gram_deviation: gram,
        h_deviation,
        higher_moments,
    })
}

/// Full construction: eigensystem, moduli, phase (and filter) search,
/// validation.
pub fn solve_scaling_vector(pair: &FinitePair, mode: &FilterMode, options: &SolverOptions) -> Result<SolverReport> {
    let eig = eigensystem(pair.tau_matrix())?;
    let moments = MomentSystem::new(&eig.values)?;
    let moduli = solve_moduli(&moments)?;
    let n = pair.dim();
    let mut report = SolverReport {
        model: pair.label().to_string(),
        dimension: n,
        eigenvalues: eig.values.iter().copied().map(ComplexValue::from).collect(),
        gamma: moduli.gamma.clone(),
        condition_estimate: moduli.condition_estimate,
        feasible: false,
        residual: None,
        threshold: RESIDUAL_THRESHOLD,
        attempts: options.attempts,
        best_attempt: None,
        best_theta: None,
        h: None,
        phi: None,
        validation: None,
        commutation_defect: pair.commutation_defect(),
        reason: moduli.reason.clone(),
    };
    if !moduli.feasible {
        return Ok(report);
    }
    let big_pi = eig.vectors.adjoint() * pair.pi_matrix() * &eig.vectors;
    let (fixed_h, window) = match mode {
        FilterMode::Fixed(h) => (Some(h), (*h.indices().start(), *h.indices().end())),
        FilterMode::Free { lo, hi } => {
            if lo > hi {
                return Err(MraError::Config("empty filter window".into()));
            }
            (None, (*lo, *hi))
        }
    };
    let problem = Problem {
        t: &eig.values,
        sqrt_gamma: moduli.gamma.iter().map(|g| g.re.max(0.0).sqrt()).collect(),
        big_pi: &big_pi,
        fixed_h,
        window,
    };
    let attempts = options.attempts.max(1);
    let results = par::map_range(options.exec, attempts, |a| {
        let mut rng = trial_rng(options.seed, a);
        let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        if problem.fixed_h.is_none() {
            let w = problem.width();
            let mut h: Vec<f64> = (0..2 * w).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = h.iter().map(|v| v * v).sum::<f64>().sqrt();
            h.iter_mut().for_each(|v| *v /= norm);
            x.extend(h);
        }
        levenberg_marquardt(&problem, x, options.max_iterations)
    });
    let (best_index, best) = results
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.residual.total_cmp(&b.residual).then(i.cmp(j)))
        .expect("at least one attempt");
    let h = problem.filter(&best.x);
    report.residual = Some(best.residual);
    report.best_attempt = Some(best_index);
    report.best_theta = Some(best.x[..n].iter().map(|t| t.rem_euclid(std::f64::consts::TAU)).collect());
    report.h = Some(h.taps());
    if best.residual >= RESIDUAL_THRESHOLD {
        report.reason = Some(format!(
            "no fixed point found: best residual {:e} after {attempts} attempts",
            best.residual
        ));
        return Ok(report);
    }
    let c = problem.c(&best.x);
    let phi_vec = &eig.vectors * c;
    let phi = pair.vector(phi_vec.as_slice())?;
    let validation = validate(pair, &phi, &h, options.diagnostic_orders)?;
    report.phi = Some(phi_vec.iter().copied().map(ComplexValue::from).collect());
    if validation.passed {
        report.feasible = true;
    } else {
        report.reason = Some(format!(
            "candidate failed validation (tsr {:e}, gram {:e}, h {:e})",
            validation.tsr_residual, validation.gram_deviation, validation.h_deviation
        ));
    }
    report.validation = Some(validation);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{make_finite_pair_model, make_unit_model};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn moduli_for_small_node_sets() {
        let one = solve_moduli(&MomentSystem::new(&[c(1.0, 0.0)]).unwrap()).unwrap();
        assert!((one.gamma[0].re - 1.0).abs() < 1e-15 && one.feasible);
        let pm = solve_moduli(&MomentSystem::new(&[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap()).unwrap();
        for g in &pm.gamma {
            assert!((g.re - 0.5).abs() < 1e-15 && g.im.abs() < 1e-15);
        }
    }

    #[test]
    fn cube_roots_give_complex_moduli() {
        let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let sol = solve_moduli(&MomentSystem::new(&[w, w.conj()]).unwrap()).unwrap();
        // γ₁ + γ₂ = 1 and γ₁ t₁ + γ₂ t₂ = 0, solved by hand
        let g1 = -w.conj() / (w - w.conj());
        let g = sol.gamma_values();
        assert!((g[0] - g1).norm() < 1e-14);
        assert!((g[0] - c(0.5, -0.5 / 3f64.sqrt())).norm() < 1e-14);
        assert!(!sol.real && !sol.feasible);
        assert!((g[0] + g[1] - 1.0).norm() < 1e-14);
    }

    #[test]
    fn negative_moduli_are_infeasible() {
        // nodes 1, 2 (not unimodular) give γ = (2, −1)
        let sol = solve_moduli(&MomentSystem::new(&[c(1.0, 0.0), c(2.0, 0.0)]).unwrap()).unwrap();
        let g = sol.gamma_values();
        assert!((g[0] - 2.0).norm() < 1e-14 && (g[1] + 1.0).norm() < 1e-14);
        assert!(sol.real && !sol.nonnegative && !sol.feasible);
    }

    #[test]
    fn degenerate_and_oversized_moment_systems() {
        assert!(matches!(
            MomentSystem::new(&[c(1.0, 0.0), c(1.0, 1e-12)]),
            Err(MraError::DegenerateSpectrum(_))
        ));
        let many: Vec<Complex64> = (0..65).map(|k| Complex64::from_polar(1.0, k as f64 * 0.01)).collect();
        assert!(matches!(MomentSystem::new(&many), Err(MraError::Config(_))));
        let clustered: Vec<Complex64> = (0..40).map(|k| Complex64::from_polar(1.0, k as f64 * 1e-3)).collect();
        assert!(matches!(
            solve_moduli(&MomentSystem::new(&clustered).unwrap()),
            Err(MraError::Conditioning { .. })
        ));
    }

    #[test]
    fn c2_pair_is_infeasible() {
        let m = make_finite_pair_model([1.0, 0.0, 0.0], [0.0, 0.0, 1.0], 0.0).unwrap();
        let r = solve_scaling_vector(&m.pair, &FilterMode::Fixed(Filter::from_real(0, &[1.0])), &SolverOptions::default()).unwrap();
        assert!(!r.feasible && r.phi.is_none() && r.reason.is_some());
        assert!(r.commutation_defect < 1e-14);
    }

    #[test]
    fn unit_model() {
        let (m, _) = make_unit_model().unwrap();
        let r = solve_scaling_vector(&m.pair, &FilterMode::Fixed(Filter::from_real(0, &[1.0])), &SolverOptions::default()).unwrap();
        assert!(r.feasible);
        assert!((r.phi.as_ref().unwrap()[0].re.hypot(r.phi.as_ref().unwrap()[0].im) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fixture_recovered_with_fixed_filter() {
        let f = fixtures::four_dim_fixture(4).unwrap();
        let opts = SolverOptions {
            seed: 17,
            ..SolverOptions::default()
        };
        let r = solve_scaling_vector(&f.pair, &FilterMode::Fixed(f.h.clone()), &opts).unwrap();
        assert!(r.feasible, "{:?}", r.reason);
        assert!(r.residual.unwrap() < 1e-8);
        let v = r.validation.as_ref().unwrap();
        assert!(v.passed && v.tsr_residual < 1e-8 && v.gram_deviation < 1e-8);
        // matches the planted vector up to a global phase
        let phi = r.phi.as_ref().unwrap();
        let overlap: Complex64 = phi.iter().zip(&f.phi).map(|(a, b)| Complex64::new(a.re, a.im) * b.conj()).sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn deterministic_reports() {
        let f = fixtures::four_dim_fixture(4).unwrap();
        let mode = FilterMode::Free { lo: 0, hi: 1 };
        let a = solve_scaling_vector(&f.pair, &mode, &SolverOptions { seed: 3, attempts: 8, ..Default::default() }).unwrap();
        let b = solve_scaling_vector(
            &f.pair,
            &mode,
            &SolverOptions {
                seed: 3,
                attempts: 8,
                exec: Execution::Sequential,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(a, b);
    }
}
