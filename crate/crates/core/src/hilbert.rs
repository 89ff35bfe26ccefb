//! Finite representations of the model Hilbert spaces.
//!
//! A [`StateVector`] stores a contiguous window of complex coefficients plus
//! the integer index of its first entry; coefficients outside the window are
//! zero. Grid models weight the discrete dot product with the grid spacing,
//! which is exact for piecewise-constant vectors.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{MraError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceKind {
    DyadicLine,
    UnitIntervalWarped,
    SequenceSpace,
    FiniteDim,
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SpaceKind::DyadicLine => "dyadic-line",
            SpaceKind::UnitIntervalWarped => "unit-interval-warped",
            SpaceKind::SequenceSpace => "sequence-space",
            SpaceKind::FiniteDim => "finite-dim",
        };
        f.write_str(s)
    }
}

/// Tolerance ladder: representation-exact identities versus
/// quadrature-limited ones.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub exact: f64,
    pub quadrature: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            exact: 1e-12,
            quadrature: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpace {
    pub id: String,
    pub kind: SpaceKind,
    /// Finest dyadic level `L` (grid spacing `2^-L`) or the dimension of a
    /// finite model.
    pub resolution: u32,
    /// Representable index window `[lo, hi)`.
    pub extent: (i64, i64),
    /// Weight of each coefficient in the inner product.
    pub weight: f64,
    pub quadrature: String,
}

impl ModelSpace {
    pub fn new(
        id: impl Into<String>,
        kind: SpaceKind,
        resolution: u32,
        extent: (i64, i64),
        weight: f64,
        quadrature: impl Into<String>,
    ) -> Result<Arc<Self>> {
        if resolution < 1 {
            return Err(MraError::Config("resolution must be at least 1".into()));
        }
        if extent.0 >= extent.1 {
            return Err(MraError::Config(format!("empty extent {extent:?}")));
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(MraError::Config(format!("invalid weight {weight}")));
        }
        Ok(Arc::new(ModelSpace {
            id: id.into(),
            kind,
            resolution,
            extent,
            weight,
            quadrature: quadrature.into(),
        }))
    }

    pub fn finite(id: impl Into<String>, dim: usize) -> Result<Arc<Self>> {
        Self::new(
            id,
            SpaceKind::FiniteDim,
            dim as u32,
            (0, dim as i64),
            1.0,
            "exact",
        )
    }

    pub fn contains_window(&self, lo: i64, hi: i64) -> bool {
        lo >= self.extent.0 && hi <= self.extent.1
    }
}

#[derive(Clone, Debug)]
pub struct StateVector {
    space: Arc<ModelSpace>,
    offset: i64,
    coeffs: Vec<Complex64>,
}

impl StateVector {
    pub fn new(space: Arc<ModelSpace>, offset: i64, coeffs: Vec<Complex64>) -> Self {
        StateVector {
            space,
            offset,
            coeffs,
        }
    }

    pub fn from_real(space: Arc<ModelSpace>, offset: i64, values: &[f64]) -> Self {
        let coeffs = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(space, offset, coeffs)
    }

    pub fn zero(space: Arc<ModelSpace>) -> Self {
        Self::new(space, 0, Vec::new())
    }

    /// Unit vector supported on the single index `index`.
    pub fn unit(space: Arc<ModelSpace>, index: i64) -> Self {
        let value = 1.0 / space.weight.sqrt();
        Self::new(space, index, vec![Complex64::new(value, 0.0)])
    }

    pub fn space(&self) -> &Arc<ModelSpace> {
        &self.space
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// One past the last stored index.
    pub fn end(&self) -> i64 {
        self.offset + self.coeffs.len() as i64
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, index: i64) -> Complex64 {
        let i = index - self.offset;
        if i < 0 || i >= self.coeffs.len() as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[i as usize]
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.space.weight * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Grid 1-norm `Σ w |c_i|`.
    pub fn norm_l1(&self) -> f64 {
        self.space.weight * self.coeffs.iter().map(|c| c.norm()).sum::<f64>()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let coeffs = self.coeffs.iter().map(|&c| c * factor).collect();
        Self::new(self.space.clone(), self.offset, coeffs)
    }

    /// Returns `self` normalised to unit norm; the zero vector is returned
    /// unchanged.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            self.clone()
        } else {
            self.scaled(Complex64::new(1.0 / n, 0.0))
        }
    }

    /// Drops exact zeros at both ends of the window.
    pub fn trimmed(mut self) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        let first = self.coeffs.iter().position(|&c| c != zero);
        match first {
            None => {
                self.coeffs.clear();
                self.offset = 0;
            }
            Some(first) => {
                let last = self.coeffs.iter().rposition(|&c| c != zero).unwrap();
                self.coeffs.truncate(last + 1);
                self.coeffs.drain(..first);
                self.offset += first as i64;
            }
        }
        self
    }

    pub fn same_space(&self, other: &StateVector) -> Result<()> {
        if Arc::ptr_eq(&self.space, &other.space) || self.space == other.space {
            Ok(())
        } else {
            Err(MraError::IncompatibleSpaces {
                left: self.space.id.clone(),
                right: other.space.id.clone(),
            })
        }
    }

    pub fn sub(&self, other: &StateVector) -> Result<StateVector> {
        combine(&[(Complex64::new(1.0, 0.0), self), (Complex64::new(-1.0, 0.0), other)])
    }

    pub fn add(&self, other: &StateVector) -> Result<StateVector> {
        combine(&[(Complex64::new(1.0, 0.0), self), (Complex64::new(1.0, 0.0), other)])
    }

    /// `‖self − other‖`.
    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }

    pub fn to_record(&self) -> StateRecord {
        StateRecord {
            space_id: self.space.id.clone(),
            offset: self.offset,
            re: self.coeffs.iter().map(|c| c.re).collect(),
            im: self.coeffs.iter().map(|c| c.im).collect(),
        }
    }

    pub fn from_record(space: Arc<ModelSpace>, record: &StateRecord) -> Result<Self> {
        if record.space_id != space.id {
            return Err(MraError::IncompatibleSpaces {
                left: record.space_id.clone(),
                right: space.id.clone(),
            });
        }
        if record.re.len() != record.im.len() {
            return Err(MraError::Config(format!(
                "record has {} real and {} imaginary parts",
                record.re.len(),
                record.im.len()
            )));
        }
        let end = record.offset + record.re.len() as i64;
        if !space.contains_window(record.offset, end) {
            return Err(MraError::Config(format!(
                "record window [{}, {end}) exceeds the space extent {:?}",
                record.offset, space.extent
            )));
        }
        let coeffs = record
            .re
            .iter()
            .zip(&record.im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        Ok(Self::new(space, record.offset, coeffs))
    }
}

/// Serialised form of a [`StateVector`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    #[serde(rename = "space-id")]
    pub space_id: String,
    pub offset: i64,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// `⟨u, v⟩`, linear in `u` and conjugate-linear in `v`.
pub fn inner_product(u: &StateVector, v: &StateVector) -> Result<Complex64> {
    u.same_space(v)?;
    let lo = u.offset.max(v.offset);
    let hi = u.end().min(v.end());
    let mut acc = Complex64::new(0.0, 0.0);
    if lo < hi {
        let a = &u.coeffs[(lo - u.offset) as usize..(hi - u.offset) as usize];
        let b = &v.coeffs[(lo - v.offset) as usize..(hi - v.offset) as usize];
        for (x, y) in a.iter().zip(b) {
            acc += x * y.conj();
        }
    }
    Ok(acc * u.space.weight)
}

/// Exact finite linear combination `Σ a_i v_i` over the hull of the inputs.
pub fn combine(terms: &[(Complex64, &StateVector)]) -> Result<StateVector> {
    let (_, first) = terms.first().ok_or(MraError::EmptyCombination)?;
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for (_, v) in terms {
        first.same_space(v)?;
        if !v.is_empty() {
            lo = lo.min(v.offset);
            hi = hi.max(v.end());
        }
    }
    if lo >= hi {
        return Ok(StateVector::zero(first.space.clone()));
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); (hi - lo) as usize];
    for (a, v) in terms {
        let start = (v.offset - lo) as usize;
        for (slot, c) in coeffs[start..].iter_mut().zip(&v.coeffs) {
            *slot += a * c;
        }
    }
    Ok(StateVector::new(first.space.clone(), lo, coeffs))
}

/// Combination with an owned term list, convenient for generated families.
pub fn combine_owned(terms: &[(Complex64, StateVector)]) -> Result<StateVector> {
    let borrowed: Vec<(Complex64, &StateVector)> = terms.iter().map(|(a, v)| (*a, v)).collect();
    combine(&borrowed)
}

/// Largest entry of `|G − I|` for the Gram matrix of `family`.
pub fn gram_deviation(family: &[StateVector]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, a) in family.iter().enumerate() {
        for (j, b) in family.iter().enumerate().skip(i) {
            let g = inner_product(a, b)?;
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - target).norm());
        }
    }
    Ok(worst)
}

/// Orthogonal projection of `f` onto the span of an orthonormal family.
///
/// Returns `Σ_k ⟨f, e_k⟩ e_k` together with the coefficients `⟨f, e_k⟩`.
pub fn project_onto_family(
    f: &StateVector,
    family: &[StateVector],
    tolerance: f64,
) -> Result<(StateVector, Vec<Complex64>)> {
    let deviation = gram_deviation(family)?;
    if deviation > tolerance {
        return Err(MraError::NonOrthonormalFamily { deviation });
    }
    let coeffs = family
        .iter()
        .map(|e| inner_product(f, e))
        .collect::<Result<Vec<_>>>()?;
    if family.is_empty() {
        return Ok((StateVector::zero(f.space.clone()), coeffs));
    }
    let terms: Vec<(Complex64, &StateVector)> = coeffs.iter().copied().zip(family.iter()).collect();
    Ok((combine(&terms)?, coeffs))
}
