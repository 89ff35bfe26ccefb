use num_complex::Complex64;
use thiserror::Error;

use crate::operators::Generator;

pub type Result<T, E = MraError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MraError {
    #[error("vectors belong to different spaces ({left} vs {right})")]
    IncompatibleSpaces { left: String, right: String },

    #[error("cannot combine an empty list of terms")]
    EmptyCombination,

    #[error("family is not orthonormal: worst Gram deviation {deviation:e}")]
    NonOrthonormalFamily { deviation: f64 },

    #[error("{generator}^{exponent} leaves the representable window [{lo}, {hi})")]
    WindowOverflow {
        generator: Generator,
        exponent: i64,
        lo: i64,
        hi: i64,
    },

    #[error("{generator}^{exponent} needs a finer grid than the model resolution")]
    ResolutionOverflow { generator: Generator, exponent: i64 },

    #[error("commutation check (k = {k}, l = {l}) failed: {source}")]
    CommutationOverflow { k: u32, l: i64, source: Box<MraError> },

    #[error("coefficient window too small: |h_{n}| = {magnitude:e} at the boundary")]
    WindowTooSmall { n: i64, magnitude: f64 },

    #[error("truncation radius {radius} is smaller than the filter radius {required}")]
    TruncationTooSmall { radius: usize, required: usize },

    #[error("scaling system is not valid: two-scale residual {residual:e}")]
    InvalidSystem { residual: f64 },

    #[error("operation needs real two-scale coefficients")]
    UnsupportedFamily,

    #[error("window mismatch: {0}")]
    WindowMismatch(String),

    #[error("degenerate spectrum: eigenvalues {0:?} coincide")]
    DegenerateSpectrum(Vec<(Complex64, Complex64)>),

    #[error("Vandermonde system is numerically singular (condition estimate {condition:e})")]
    Conditioning { condition: f64 },

    #[error("transport discards {fraction:e} of the norm")]
    LossyTransport { fraction: f64 },

    #[error("x = {0} is outside the open unit interval")]
    DomainBoundary(f64),

    #[error("configuration error: {0}")]
    Config(String),
}
