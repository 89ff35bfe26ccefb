//! Two-scale coefficients, the K matrix, mother wavelets and the
//! orthonormality checks built on them.

use std::fmt;
use std::ops::RangeInclusive;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{MraError, Result};
use crate::hilbert::{combine_owned, gram_deviation, inner_product, StateVector};
use crate::linalg;
use crate::operators::{UnitaryPair, Verdict};
use crate::par::{self, Execution};

/// Coefficients with magnitude below this are structural zeros.
pub const STRUCTURAL_ZERO: f64 = 1e-13;

/// Finitely supported complex sequence `h_n`, `n ∈ [offset, offset + len)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Filter {
    pub offset: i64,
    pub coeffs: Vec<Complex64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tap {
    pub n: i64,
    pub re: f64,
    pub im: f64,
}

impl Filter {
    pub fn new(offset: i64, coeffs: Vec<Complex64>) -> Self {
        Filter { offset, coeffs }
    }

    pub fn from_real(offset: i64, coeffs: &[f64]) -> Self {
        Filter::new(offset, coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn get(&self, n: i64) -> Complex64 {
        let i = n - self.offset;
        if i < 0 || i >= self.coeffs.len() as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[i as usize]
        }
    }

    /// Indices `n` of the stored window.
    pub fn indices(&self) -> RangeInclusive<i64> {
        self.offset..=self.offset + self.coeffs.len() as i64 - 1
    }

    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Largest `|n|` in the stored window.
    pub fn radius(&self) -> usize {
        if self.coeffs.is_empty() {
            return 0;
        }
        let end = self.offset + self.coeffs.len() as i64 - 1;
        self.offset.unsigned_abs().max(end.unsigned_abs()) as usize
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|c| c.im.abs() < tol)
    }

    /// Drops leading and trailing structural zeros.
    pub fn trimmed(&self, threshold: f64) -> Filter {
        let first = self.coeffs.iter().position(|c| c.norm() >= threshold);
        match first {
            None => Filter::new(0, Vec::new()),
            Some(a) => {
                let b = self.coeffs.iter().rposition(|c| c.norm() >= threshold).unwrap();
                Filter::new(self.offset + a as i64, self.coeffs[a..=b].to_vec())
            }
        }
    }

    /// `Σ_n h_n conj(h_{n−2k})`.
    pub fn shifted_autocorrelation(&self, k: i64) -> Complex64 {
        self.indices().map(|n| self.get(n) * self.get(n - 2 * k).conj()).sum()
    }

    pub fn taps(&self) -> Vec<Tap> {
        self.indices()
            .zip(&self.coeffs)
            .map(|(n, c)| Tap { n, re: c.re, im: c.im })
            .collect()
    }
}

/// `Φ` with its two-scale coefficients. `seed` generates the refinement
/// `Σ h_n πτ^n seed`; it equals `phi` except for coefficient-only systems.
#[derive(Clone, Debug)]
pub struct ScalingSystem {
    pub model: String,
    pub phi: StateVector,
    pub seed: StateVector,
    pub pair: Arc<dyn UnitaryPair>,
    pub h: Filter,
    pub h_real: bool,
}

impl ScalingSystem {
    pub fn tolerance(&self) -> f64 {
        self.pair.tolerance()
    }

    /// Same system with a replaced filter (used for perturbation checks).
    pub fn with_filter(&self, h: Filter) -> ScalingSystem {
        let h_real = h.is_real(self.tolerance());
        ScalingSystem {
            h,
            h_real,
            ..self.clone()
        }
    }

    /// `πτ^n seed`.
    pub fn refinement_vector(&self, n: i64) -> Result<StateVector> {
        self.pair.pi_tau(&self.seed, 1, n)
    }

    /// `Σ_n c_n πτ^n seed`.
    pub fn refine(&self, c: &Filter) -> Result<StateVector> {
        let terms = c
            .indices()
            .zip(&c.coeffs)
            .filter(|(_, a)| a.norm() > 0.0)
            .map(|(n, a)| Ok((*a, self.refinement_vector(n)?)))
            .collect::<Result<Vec<_>>>()?;
        if terms.is_empty() {
            return Ok(StateVector::zero(self.phi.space().clone()));
        }
        combine_owned(&terms)
    }
}

/// `h_n = ⟨Φ, πτ^nΦ⟩` over `window` without any post-processing.
pub fn raw_tsr_coefficients(phi: &StateVector, pair: &dyn UnitaryPair, window: RangeInclusive<i64>) -> Result<Filter> {
    let offset = *window.start();
    let coeffs = window
        .map(|n| inner_product(phi, &pair.pi_tau(phi, 1, n)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(Filter::new(offset, coeffs))
}

/// Extracts `h_n` on `window`, rejecting windows whose boundary
/// coefficients are not negligible and trimming structural zeros.
pub fn extract_tsr_coefficients(
    phi: &StateVector,
    pair: Arc<dyn UnitaryPair>,
    window: RangeInclusive<i64>,
) -> Result<ScalingSystem> {
    let tol = pair.tolerance();
    if (phi.norm() - 1.0).abs() > tol {
        return Err(MraError::Config(format!(
            "scaling vector must be normalised (norm {})",
            phi.norm()
        )));
    }
    if window.is_empty() {
        return Err(MraError::Config("empty coefficient window".into()));
    }
    let raw = raw_tsr_coefficients(phi, pair.as_ref(), window.clone())?;
    for n in [*window.start(), *window.end()] {
        let magnitude = raw.get(n).norm();
        if magnitude >= tol {
            return Err(MraError::WindowTooSmall { n, magnitude });
        }
    }
    let h = raw.trimmed(STRUCTURAL_ZERO);
    let h_real = h.is_real(tol);
    Ok(ScalingSystem {
        model: pair.label().to_string(),
        phi: phi.clone(),
        seed: phi.clone(),
        pair,
        h,
        h_real,
    })
}

/// `‖Φ − Σ_n h_n πτ^n seed‖`.
pub fn tsr_residual(sys: &ScalingSystem) -> Result<f64> {
    let refined = sys.refine(&sys.h)?;
    sys.phi.distance(&refined)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParityConvention {
    /// `K_{l,n} = h_{l−n}` for even `n`, `(−1)^{l−1} h_{n−l}` for odd `n`.
    #[default]
    ColumnParity,
    /// The transpose of the printed layout.
    RowParity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KMatrix {
    pub radius: usize,
    pub convention: ParityConvention,
    /// Rows and columns indexed by `l, n ∈ [−M, M]`.
    pub entries: DMatrix<Complex64>,
}

impl KMatrix {
    pub fn entry(&self, l: i64, n: i64) -> Complex64 {
        let m = self.radius as i64;
        self.entries[((l + m) as usize, (n + m) as usize)]
    }
}

fn k_entry(h: &Filter, l: i64, n: i64) -> Complex64 {
    if n.rem_euclid(2) == 0 {
        h.get(l - n)
    } else {
        let sign = if (l - 1).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        h.get(n - l) * sign
    }
}

pub fn build_k_matrix(h: &Filter, radius: usize, convention: ParityConvention) -> Result<KMatrix> {
    let required = h.radius();
    if radius < required {
        return Err(MraError::TruncationTooSmall { radius, required });
    }
    let m = radius as i64;
    let dim = 2 * radius + 1;
    let entries = DMatrix::from_fn(dim, dim, |r, c| {
        let (l, n) = (r as i64 - m, c as i64 - m);
        match convention {
            ParityConvention::ColumnParity => k_entry(h, l, n),
            ParityConvention::RowParity => k_entry(h, n, l),
        }
    });
    Ok(KMatrix {
        radius,
        convention,
        entries,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KProbe {
    pub radius: usize,
    pub smallest_singular_value: f64,
    pub condition_estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KInvertibilityReport {
    pub floor: f64,
    pub probes: Vec<KProbe>,
    pub min_singular_value: f64,
    pub numerically_invertible: bool,
    pub verdict: String,
}

pub fn probe_k_matrix(k: &KMatrix) -> KProbe {
    let s = linalg::singular_values(&k.entries);
    KProbe {
        radius: k.radius,
        smallest_singular_value: s.last().copied().unwrap_or(0.0),
        condition_estimate: linalg::condition_from_singular_values(&s),
    }
}

/// Sweeps the truncation radius and checks that `σ_min` stays above `floor`.
pub fn assess_k_invertibility(
    h: &Filter,
    radii: &[usize],
    convention: ParityConvention,
    floor: f64,
) -> Result<KInvertibilityReport> {
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MraError::Config("truncation radii must be increasing".into()));
    }
    let mats = radii
        .iter()
        .map(|&m| build_k_matrix(h, m, convention))
        .collect::<Result<Vec<_>>>()?;
    Ok(assess_k_matrices(&mats, floor))
}

pub fn assess_k_matrices(mats: &[KMatrix], floor: f64) -> KInvertibilityReport {
    let probes: Vec<KProbe> = mats.iter().map(probe_k_matrix).collect();
    let min_singular_value = probes
        .iter()
        .map(|p| p.smallest_singular_value)
        .fold(f64::INFINITY, f64::min);
    let ok = !probes.is_empty() && min_singular_value >= floor;
    KInvertibilityReport {
        floor,
        probes,
        min_singular_value,
        numerically_invertible: ok,
        verdict: if ok { "numerically invertible" } else { "not invertible" }.into(),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveletVariant {
    /// `Ψ = Σ (−1)^{n−1} h_{−n−1} πτ^nΦ`.
    #[default]
    Standard,
    /// `Ψ̃ = Σ (−1)^n h_{1−n} πτ^nΦ`.
    Alternate,
}

impl fmt::Display for WaveletVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WaveletVariant::Standard => "standard",
            WaveletVariant::Alternate => "alternate",
        })
    }
}

#[derive(Clone, Debug)]
pub struct WaveletFamily {
    pub psi: StateVector,
    pub variant: WaveletVariant,
    pub h_real: bool,
    /// Coefficients of `Ψ` in the vectors `πτ^n seed`.
    pub expansion: Filter,
    pub norm_defect: f64,
    pub system: Arc<ScalingSystem>,
}

/// Expansion coefficients of the mother wavelet, exactly as printed (no
/// conjugation of `h`).
pub fn wavelet_filter(h: &Filter, variant: WaveletVariant) -> Filter {
    if h.coeffs.is_empty() {
        return Filter::new(0, Vec::new());
    }
    let (a, b) = (*h.indices().start(), *h.indices().end());
    let sign = |n: i64| if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    match variant {
        WaveletVariant::Standard => {
            // −n−1 ∈ [a, b]  ⇔  n ∈ [−b−1, −a−1]
            let lo = -b - 1;
            let coeffs = (lo..=-a - 1).map(|n| h.get(-n - 1) * sign(n - 1)).collect();
            Filter::new(lo, coeffs)
        }
        WaveletVariant::Alternate => {
            // 1−n ∈ [a, b]  ⇔  n ∈ [1−b, 1−a]
            let lo = 1 - b;
            let coeffs = (lo..=1 - a).map(|n| h.get(1 - n) * sign(n)).collect();
            Filter::new(lo, coeffs)
        }
    }
}

pub fn construct_mother_wavelet(sys: Arc<ScalingSystem>, variant: WaveletVariant) -> Result<WaveletFamily> {
    let residual = tsr_residual(&sys)?;
    if residual > sys.tolerance() {
        return Err(MraError::InvalidSystem { residual });
    }
    let expansion = wavelet_filter(&sys.h, variant);
    let psi = sys.refine(&expansion)?;
    Ok(WaveletFamily {
        norm_defect: (psi.norm() - 1.0).abs(),
        h_real: sys.h_real,
        psi,
        variant,
        expansion,
        system: sys,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftValue {
    pub k: i64,
    pub re: f64,
    pub im: f64,
}

impl ShiftValue {
    fn new(k: i64, z: Complex64) -> Self {
        ShiftValue { k, re: z.re, im: z.im }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrthonormalityReport {
    pub krange: (i64, i64),
    /// `⟨v, τ^k v⟩` for each tested `k`.
    pub values: Vec<ShiftValue>,
    /// `max_k |⟨v, τ^k v⟩ − δ_{k,0}|`.
    pub max_deviation: f64,
    /// `max_k |Σ h_n conj(h_{n−2k}) − δ_{k,0}|`, when a system is supplied.
    pub coefficient_deviation: Option<f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
}

fn delta(k: i64) -> f64 {
    if k == 0 {
        1.0
    } else {
        0.0
    }
}

pub fn shift_overlaps(v: &StateVector, pair: &dyn UnitaryPair, krange: RangeInclusive<i64>) -> Result<Vec<ShiftValue>> {
    krange
        .map(|k| Ok(ShiftValue::new(k, inner_product(v, &pair.tau_pow(v, k)?)?)))
        .collect()
}

pub fn coefficient_orthonormality_deviation(h: &Filter, krange: RangeInclusive<i64>) -> f64 {
    krange
        .map(|k| (h.shifted_autocorrelation(k) - delta(k)).norm())
        .fold(0.0, f64::max)
}

pub fn pairwise_orthonormality(
    v: &StateVector,
    pair: &dyn UnitaryPair,
    krange: RangeInclusive<i64>,
    sys: Option<&ScalingSystem>,
) -> Result<OrthonormalityReport> {
    let values = shift_overlaps(v, pair, krange.clone())?;
    let max_deviation = values
        .iter()
        .map(|s| (s.value() - delta(s.k)).norm())
        .fold(0.0, f64::max);
    let coefficient_deviation = sys.map(|s| coefficient_orthonormality_deviation(&s.h, krange.clone()));
    let tolerance = pair.tolerance();
    let ok = max_deviation < tolerance && coefficient_deviation.is_none_or(|d| d < tolerance);
    Ok(OrthonormalityReport {
        krange: (*krange.start(), *krange.end()),
        values,
        max_deviation,
        coefficient_deviation,
        tolerance,
        verdict: Verdict::from_bool(ok),
    })
}

/// Largest gap between `⟨Ψ, τ^kΨ⟩` and `Σ_n h_n conj(h_{n+2k})`.
pub fn wavelet_coefficient_consistency(fam: &WaveletFamily, krange: RangeInclusive<i64>) -> Result<f64> {
    let values = shift_overlaps(&fam.psi, fam.system.pair.as_ref(), krange)?;
    Ok(values
        .iter()
        .map(|s| (s.value() - fam.system.h.shifted_autocorrelation(-s.k)).norm())
        .fold(0.0, f64::max))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    #[serde(rename = "Psi in W0")]
    InW0,
    #[serde(rename = "Psi not in W0")]
    NotInW0,
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Membership::InW0 => "Psi in W0",
            Membership::NotInW0 => "Psi not in W0",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossOrthogonalityReport {
    pub krange: (i64, i64),
    /// `⟨Ψ, τ^kΦ⟩`.
    pub values: Vec<ShiftValue>,
    pub max_abs: f64,
    pub worst_k: i64,
    pub h_real: bool,
    /// Set when `h` is complex: the real-coefficient hypothesis does not
    /// apply and the values are reported as found.
    pub informational: bool,
    pub tolerance: f64,
    pub membership: Membership,
    pub verdict: Verdict,
}

pub fn cross_orthogonality(fam: &WaveletFamily, krange: RangeInclusive<i64>) -> Result<CrossOrthogonalityReport> {
    let sys = &fam.system;
    let values = krange
        .clone()
        .map(|k| {
            let shifted = sys.pair.tau_pow(&sys.phi, k)?;
            Ok(ShiftValue::new(k, inner_product(&fam.psi, &shifted)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let (worst_k, max_abs) = values
        .iter()
        .map(|s| (s.k, s.value().norm()))
        .fold((*krange.start(), 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    let tolerance = sys.tolerance();
    let inside = max_abs < tolerance;
    Ok(CrossOrthogonalityReport {
        krange: (*krange.start(), *krange.end()),
        values,
        max_abs,
        worst_k,
        h_real: fam.h_real,
        informational: !fam.h_real,
        tolerance,
        membership: if inside { Membership::InW0 } else { Membership::NotInW0 },
        verdict: Verdict::from_bool(inside),
    })
}

#[derive(Clone, Debug)]
pub struct IndexedVector {
    pub j: i64,
    pub k: i64,
    pub vector: StateVector,
}

/// `π^jτ^kΨ` over the index window, ordered by `(j, k)`.
pub fn generate_wavelet_family(
    fam: &WaveletFamily,
    jrange: RangeInclusive<i64>,
    krange: RangeInclusive<i64>,
    exec: Execution,
) -> Result<Vec<IndexedVector>> {
    if !fam.h_real {
        return Err(MraError::UnsupportedFamily);
    }
    let index: Vec<(i64, i64)> = jrange.flat_map(|j| krange.clone().map(move |k| (j, k))).collect();
    let pair = fam.system.pair.as_ref();
    par::map_slice(exec, &index, |&(j, k)| {
        Ok(IndexedVector {
            j,
            k,
            vector: pair.pi_tau(&fam.psi, j, k)?,
        })
    })
    .into_iter()
    .collect()
}

pub fn family_gram_deviation(family: &[IndexedVector]) -> Result<f64> {
    let vectors: Vec<StateVector> = family.iter().map(|v| v.vector.clone()).collect();
    gram_deviation(&vectors)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemResiduals {
    pub tsr: f64,
    pub orthonormality: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingSystemRecord {
    pub model: String,
    pub h: Vec<Tap>,
    pub h_real: bool,
    pub residuals: SystemResiduals,
}

pub fn system_record(sys: &ScalingSystem, krange: RangeInclusive<i64>) -> Result<ScalingSystemRecord> {
    let ortho = pairwise_orthonormality(&sys.phi, sys.pair.as_ref(), krange, None)?;
    Ok(ScalingSystemRecord {
        model: sys.model.clone(),
        h: sys.h.taps(),
        h_real: sys.h_real,
        residuals: SystemResiduals {
            tsr: tsr_residual(sys)?,
            orthonormality: ortho.max_deviation,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveletRecord {
    pub model: String,
    pub variant: WaveletVariant,
    pub h: Vec<Tap>,
    pub h_real: bool,
    pub expansion: Vec<Tap>,
    pub residuals: WaveletResiduals,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveletResiduals {
    pub norm: f64,
    pub orthonormality: f64,
    pub cross_orthogonality: f64,
    pub coefficient_consistency: f64,
}

pub fn wavelet_record(fam: &WaveletFamily, krange: RangeInclusive<i64>) -> Result<WaveletRecord> {
    let pair = fam.system.pair.as_ref();
    Ok(WaveletRecord {
        model: fam.system.model.clone(),
        variant: fam.variant,
        h: fam.system.h.taps(),
        h_real: fam.h_real,
        expansion: fam.expansion.taps(),
        residuals: WaveletResiduals {
            norm: fam.norm_defect,
            orthonormality: pairwise_orthonormality(&fam.psi, pair, krange.clone(), None)?.max_deviation,
            cross_orthogonality: cross_orthogonality(fam, krange.clone())?.max_abs,
            coefficient_consistency: wavelet_coefficient_consistency(fam, krange)?,
        },
    })
}
