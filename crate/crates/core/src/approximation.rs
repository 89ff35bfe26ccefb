//! Projections `P_j` onto `V_j = span{π^{-j}τ^kΦ}`, detail coefficients
//! `c_{j,l} = ⟨f, π^{-j}τ^lΨ⟩` and the decay and density diagnostics.

use std::ops::RangeInclusive;

use num_complex::Complex64;
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::engine::{ScalingSystem, WaveletFamily};
use crate::error::{MraError, Result};
use crate::hilbert::{combine_owned, inner_product, StateVector};
use crate::operators::{UnitaryPair, Verdict};
use crate::par::{self, Execution};

/// How the translation index is windowed at each level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KWindow {
    Fixed { lo: i64, hi: i64 },
    /// Every `k` whose generator overlaps the support of `f`, widened by
    /// `margin` on both sides.
    Covering { margin: i64 },
}

impl Default for KWindow {
    fn default() -> Self {
        KWindow::Covering { margin: 1 }
    }
}

impl KWindow {
    /// Window of `k` for `π^{-j}τ^k g` against `f`.
    pub fn resolve(&self, pair: &dyn UnitaryPair, f: &StateVector, g: &StateVector, j: i64) -> Result<RangeInclusive<i64>> {
        match *self {
            KWindow::Fixed { lo, hi } => Ok(lo..=hi),
            KWindow::Covering { margin } => {
                let (Some((fa, fb)), Some((ga, gb))) = (pair.support(f), pair.support(g)) else {
                    if pair.support(g).is_some() && f.coeffs().iter().all(|c| c.norm() == 0.0) {
                        return Ok(0..=-1);
                    }
                    return Err(MraError::Config(format!(
                        "model {} has no support coordinates; use a fixed k-window",
                        pair.label()
                    )));
                };
                let s = 2f64.powi(j as i32);
                let lo = (fa / s - gb).floor() as i64 - margin;
                let hi = (fb / s - ga).ceil() as i64 + margin;
                Ok(lo..=hi)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Projection {
    pub j: i64,
    pub vector: StateVector,
    /// `⟨f, π^{-j}τ^kΦ⟩`.
    pub coefficients: Vec<(i64, Complex64)>,
    pub boundary_magnitude: f64,
    pub window_warning: bool,
}

/// `π^{-j}τ^k g`.
fn level_vector(pair: &dyn UnitaryPair, g: &StateVector, j: i64, k: i64) -> Result<StateVector> {
    pair.pi_tau(g, -j, k)
}

fn expand(pair: &dyn UnitaryPair, g: &StateVector, j: i64, coeffs: &[(i64, Complex64)]) -> Result<StateVector> {
    let terms = coeffs
        .iter()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|&(k, c)| Ok((c, level_vector(pair, g, j, k)?)))
        .collect::<Result<Vec<_>>>()?;
    if terms.is_empty() {
        return Ok(StateVector::zero(g.space().clone()));
    }
    combine_owned(&terms)
}

fn analyse(pair: &dyn UnitaryPair, f: &StateVector, g: &StateVector, j: i64, window: RangeInclusive<i64>) -> Result<Vec<(i64, Complex64)>> {
    window
        .map(|k| Ok((k, inner_product(f, &level_vector(pair, g, j, k)?)?)))
        .collect()
}

fn boundary(coeffs: &[(i64, Complex64)]) -> f64 {
    match (coeffs.first(), coeffs.last()) {
        (Some(a), Some(b)) => a.1.norm().max(b.1.norm()),
        _ => 0.0,
    }
}

/// `P_j f = Σ_k ⟨f, π^{-j}τ^kΦ⟩ π^{-j}τ^kΦ`.
pub fn project_level(f: &StateVector, j: i64, sys: &ScalingSystem, kwindow: &KWindow) -> Result<Projection> {
    let pair = sys.pair.as_ref();
    let window = kwindow.resolve(pair, f, &sys.phi, j)?;
    let coefficients = analyse(pair, f, &sys.phi, j, window)?;
    let vector = expand(pair, &sys.phi, j, &coefficients)?;
    let boundary_magnitude = boundary(&coefficients);
    Ok(Projection {
        j,
        vector,
        window_warning: boundary_magnitude >= sys.tolerance(),
        boundary_magnitude,
        coefficients,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetailCoefficient {
    pub j: i64,
    pub k: i64,
    pub re: f64,
    pub im: f64,
}

impl DetailCoefficient {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub j: i64,
    /// `‖P_j f‖`.
    pub projection_norm: f64,
    /// `‖f − P_j f‖`.
    pub residual: f64,
    /// `Σ_l |c_{j,l}|²`.
    pub detail_energy: f64,
    /// `|‖P_{j−1}f‖² − ‖P_j f‖² − Σ_l |c_{j,l}|²| / ‖f‖²`.
    pub energy_defect: f64,
    /// `|‖f − P_j f‖² − Σ_{jmin ≤ i ≤ j} Σ_l |c_{i,l}|²| / ‖f‖²`, meaningful
    /// when `f ∈ V_{jmin−1}`.
    pub tail_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub model: String,
    pub variant: String,
    pub levels: Vec<i64>,
    pub detail_coeffs: Vec<DetailCoefficient>,
    pub summaries: Vec<LevelSummary>,
    /// `‖P_{jmin−1} f‖`, the finest projection.
    pub finest_norm: f64,
    pub input_norm: f64,
    pub tolerance: f64,
    pub energy_ok: bool,
    pub nesting_ok: bool,
    pub window_warning: bool,
    pub verdict: Verdict,
}

impl DecompositionReport {
    pub fn coefficient(&self, j: i64, k: i64) -> Complex64 {
        self.detail_coeffs
            .iter()
            .find(|c| c.j == j && c.k == k)
            .map(|c| c.value())
            .unwrap_or_default()
    }

    /// `(j, k, re, im)` rows.
    pub fn csv_rows(&self) -> Vec<(i64, i64, f64, f64)> {
        self.detail_coeffs.iter().map(|c| (c.j, c.k, c.re, c.im)).collect()
    }
}

/// Relative tolerance of the per-level energy identities.
pub const ENERGY_TOLERANCE: f64 = 1e-9;

/// Detail coefficients over `jrange` with per-level energy bookkeeping.
pub fn detail_coefficients(
    f: &StateVector,
    fam: &WaveletFamily,
    jrange: RangeInclusive<i64>,
    kwindow: &KWindow,
    exec: Execution,
) -> Result<DecompositionReport> {
    if !fam.h_real {
        return Err(MraError::UnsupportedFamily);
    }
    if jrange.is_empty() {
        return Err(MraError::Config("empty level range".into()));
    }
    let sys = fam.system.as_ref();
    let pair = sys.pair.as_ref();
    let levels: Vec<i64> = jrange.clone().collect();
    let jmin = levels[0];

    let details = par::map_slice(exec, &levels, |&j| -> Result<Vec<(i64, Complex64)>> {
        let window = kwindow.resolve(pair, f, &fam.psi, j)?;
        analyse(pair, f, &fam.psi, j, window)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let proj_levels: Vec<i64> = (jmin - 1..=*jrange.end()).collect();
    let projections = par::map_slice(exec, &proj_levels, |&j| project_level(f, j, sys, kwindow))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let fsq = f.norm_sqr().max(f64::MIN_POSITIVE);
    let mut window_warning = projections.iter().any(|p| p.window_warning);
    let mut detail_coeffs = Vec::new();
    let mut summaries = Vec::new();
    let mut cumulative = 0.0;
    for (idx, (&j, d)) in levels.iter().zip(&details).enumerate() {
        window_warning |= boundary(d) >= sys.tolerance();
        let energy: f64 = d.iter().map(|(_, c)| c.norm_sqr()).sum();
        cumulative += energy;
        let coarse = &projections[idx + 1];
        let fine = &projections[idx];
        let residual = f.distance(&coarse.vector)?;
        summaries.push(LevelSummary {
            j,
            projection_norm: coarse.vector.norm(),
            residual,
            detail_energy: energy,
            energy_defect: (fine.vector.norm_sqr() - coarse.vector.norm_sqr() - energy).abs() / fsq,
            tail_defect: (residual * residual - cumulative).abs() / fsq,
        });
        detail_coeffs.extend(d.iter().map(|&(k, c)| DetailCoefficient { j, k, re: c.re, im: c.im }));
    }
    let energy_ok = summaries.iter().all(|s| s.energy_defect < ENERGY_TOLERANCE);
    let finest_norm = projections[0].vector.norm();
    let nesting_ok = summaries
        .iter()
        .fold((finest_norm, true), |(prev, ok), s| (s.projection_norm, ok && s.projection_norm <= prev + 1e-10))
        .1;
    Ok(DecompositionReport {
        model: sys.model.clone(),
        variant: fam.variant.to_string(),
        levels,
        detail_coeffs,
        summaries,
        finest_norm,
        input_norm: f.norm(),
        tolerance: ENERGY_TOLERANCE,
        energy_ok,
        nesting_ok,
        window_warning,
        verdict: Verdict::from_bool(energy_ok && nesting_ok),
    })
}

/// `coarse + Σ c_{j,l} π^{-j}τ^lΨ`.
pub fn reconstruct(report: &DecompositionReport, fam: &WaveletFamily, coarse: &StateVector) -> Result<StateVector> {
    if report.model != fam.system.model || report.variant != fam.variant.to_string() {
        return Err(MraError::WindowMismatch(format!(
            "report for {}/{} applied to family {}/{}",
            report.model, report.variant, fam.system.model, fam.variant
        )));
    }
    if let Some(c) = report.detail_coeffs.iter().find(|c| !report.levels.contains(&c.j)) {
        return Err(MraError::WindowMismatch(format!("coefficient at level {} outside the report levels", c.j)));
    }
    coarse.same_space(&fam.psi)?;
    let pair = fam.system.pair.as_ref();
    let mut terms = vec![(Complex64::new(1.0, 0.0), coarse.clone())];
    for c in &report.detail_coeffs {
        if c.value().norm() > 0.0 {
            terms.push((c.value(), level_vector(pair, &fam.psi, c.j, c.k)?));
        }
    }
    combine_owned(&terms)
}

/// Copy of the report with every `|c| < eps` removed, and the removed energy.
pub fn thresholded(report: &DecompositionReport, eps: f64) -> (DecompositionReport, f64) {
    let mut out = report.clone();
    let mut dropped = 0.0;
    out.detail_coeffs.retain(|c| {
        let keep = c.value().norm() >= eps;
        if !keep {
            dropped += c.value().norm_sqr();
        }
        keep
    });
    (out, dropped)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntersectionReport {
    pub model: String,
    pub jmax: i64,
    /// `‖P_j f‖` for `j = 0…jmax`.
    pub norms: Vec<f64>,
    /// `2^{-j} ‖f‖₁²`, present for the Haar model.
    pub bounds: Option<Vec<f64>>,
    pub bound_ok: Option<bool>,
    pub nonincreasing: bool,
    /// Slope `r` of the least-squares fit `log₂ ‖P_j f‖ ≈ a − r j`
    /// (the reference decay `2^{-j/2}` has `r = 1/2`).
    pub fitted_decay_rate: Option<f64>,
    pub verdict: Verdict,
}

fn fit_decay(norms: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = norms
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0.0)
        .map(|(j, &n)| (j as f64, n.log2()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(-sxy / sxx)
}

/// `‖P_j f‖` for `j = 0…jmax` with the decay fit and, on the Haar model,
/// the bound `‖P_j f‖² ≤ 2^{-j} ‖f‖₁²`.
pub fn intersection_diagnostic(f: &StateVector, sys: &ScalingSystem, jmax: i64, exec: Execution) -> Result<IntersectionReport> {
    if f.norm() == 0.0 {
        return Err(MraError::Config("intersection diagnostic needs a nonzero vector".into()));
    }
    let levels: Vec<i64> = (0..=jmax.max(0)).collect();
    let norms = par::map_slice(exec, &levels, |&j| project_level(f, j, sys, &KWindow::default()).map(|p| p.vector.norm()))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let nonincreasing = norms.windows(2).all(|w| w[1] <= w[0] + 1e-10);
    let (bounds, bound_ok) = if sys.model == "haar" {
        let l1 = f.norm_l1();
        let b: Vec<f64> = levels.iter().map(|&j| 2f64.powi(-(j as i32)) * l1 * l1).collect();
        let ok = norms.iter().zip(&b).all(|(n, b)| n * n <= b * (1.0 + 1e-12));
        (Some(b), Some(ok))
    } else {
        (None, None)
    };
    Ok(IntersectionReport {
        model: sys.model.clone(),
        jmax,
        fitted_decay_rate: fit_decay(&norms),
        verdict: Verdict::from_bool(bound_ok.unwrap_or(true) && nonincreasing),
        norms,
        bounds,
        bound_ok,
        nonincreasing,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensitySample {
    pub index: usize,
    pub max_ratio: f64,
    pub j0: i64,
    pub k0: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub model: String,
    pub jwindow: (i64, i64),
    pub kwindow: (i64, i64),
    pub samples: Vec<DensitySample>,
    /// Smallest per-sample maximum: an empirical candidate for the constant,
    /// not a proof of density.
    pub empirical_lower_bound: f64,
    pub all_positive: bool,
    pub note: String,
}

/// Per sample, `max_{j,k} |⟨π^j f, τ^kΦ⟩| / ‖f‖`, evaluated through the
/// adjoint as `|⟨f, π^{-j}τ^kΦ⟩|`.
pub fn density_diagnostic(
    samples: &[StateVector],
    sys: &ScalingSystem,
    jwindow: RangeInclusive<i64>,
    kwindow: RangeInclusive<i64>,
    exec: Execution,
) -> Result<DensityReport> {
    let pair = sys.pair.as_ref();
    let index: Vec<(i64, i64)> = jwindow.clone().flat_map(|j| kwindow.clone().map(move |k| (j, k))).collect();
    let generators = par::map_slice(exec, &index, |&(j, k)| level_vector(pair, &sys.phi, j, k))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let indexed: Vec<(usize, &StateVector)> = samples.iter().enumerate().collect();
    let results = par::map_slice(exec, &indexed, |&(i, f)| -> Result<DensitySample> {
        let norm = f.norm();
        if norm == 0.0 {
            return Err(MraError::Config(format!("density sample {i} is zero")));
        }
        let mut best = DensitySample { index: i, max_ratio: -1.0, j0: 0, k0: 0 };
        for (&(j, k), g) in index.iter().zip(&generators) {
            let r = inner_product(f, g)?.norm() / norm;
            if r > best.max_ratio {
                best = DensitySample { index: i, max_ratio: r, j0: j, k0: k };
            }
        }
        Ok(best)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let empirical_lower_bound = results.iter().map(|s| s.max_ratio).fold(f64::INFINITY, f64::min);
    Ok(DensityReport {
        model: sys.model.clone(),
        jwindow: (*jwindow.start(), *jwindow.end()),
        kwindow: (*kwindow.start(), *kwindow.end()),
        all_positive: results.iter().all(|s| s.max_ratio > 0.0),
        samples: results,
        empirical_lower_bound,
        note: "per-sample constant; empirical only, not a density proof".into(),
    })
}

/// Random unit vector `Σ_k a_k π^{-j}τ^kΦ`, `k ∈ krange`, with complex
/// normal `a_k`.
pub fn random_level_vector(sys: &ScalingSystem, j: i64, krange: RangeInclusive<i64>, rng: &mut dyn RngCore) -> Result<StateVector> {
    let pair = sys.pair.as_ref();
    let terms = krange
        .map(|k| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Ok((Complex64::new(re, im), level_vector(pair, &sys.phi, j, k)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(combine_owned(&terms)?.normalized())
}
