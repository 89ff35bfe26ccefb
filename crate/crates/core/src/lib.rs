//! Multi-resolution analysis in arbitrary Hilbert spaces.
//!
//! The crate is organised around a unitary pair `(τ, π)` obeying `τπ = πτ²`
//! acting on a finite representation of a model Hilbert space. Given a
//! scaling vector `Φ` whose translates `τ^k Φ` are orthonormal, the engine
//! extracts the two-scale coefficients `h_n = ⟨Φ, πτ^nΦ⟩`, builds the mother
//! wavelet `Ψ` and certifies the orthonormality relations numerically.
//!
//! Modules:
//!
//! - [`hilbert`]: model spaces, state vectors and inner-product arithmetic.
//! - [`operators`]: the [`UnitaryPair`](operators::UnitaryPair) abstraction,
//!   operator words and commutation certification.
//! - [`engine`]: two-scale coefficients, the K matrix, mother wavelets.
//! - [`models`]: Haar line, sequence space, warped interval, `C²` pair and the
//!   complex-coefficient counterexample.
//! - [`approximation`]: projections `P_j`, detail coefficients, diagnostics.
//! - [`solver`]: scaling-vector construction from an eigenbasis of `τ`.

pub mod approximation;
pub mod engine;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod models;
pub mod operators;
pub mod par;
pub mod quadrature;
pub mod solver;

pub use error::{MraError, Result};
pub use hilbert::{ModelSpace, SpaceKind, StateVector, Tolerances};
pub use num_complex::Complex64;
pub use operators::{Generator, OperatorWord, UnitaryPair};
pub use par::Execution;
