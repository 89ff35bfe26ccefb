//! Concrete models: the Haar line, its sequence-space image, the warped
//! interval, the `C²` pair and the complex-coefficient counterexample.

pub mod counterexample;
pub mod dyadic;
pub mod finite;
pub mod haar;
pub mod hermite;
pub mod sequence;
pub mod warped;

pub use counterexample::make_complex_counterexample_system;
pub use dyadic::DyadicPair;
pub use finite::{make_finite_pair_model, make_unit_model, FiniteModel, FinitePair};
pub use haar::{make_haar_line_model, HaarLineModel};
pub use sequence::{make_sequence_model, SequenceConfig, SequenceModel};
pub use warped::{make_warped_interval_model, WarpCell, WarpMap, WarpedModel};
