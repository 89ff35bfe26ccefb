//! Builds the selected model and its scaling system from a run config.

use std::sync::Arc;

use anyhow::Result;
use mra_core::engine::{extract_tsr_coefficients, Filter, ScalingSystem};
use mra_core::models::{
    make_complex_counterexample_system, make_finite_pair_model, make_haar_line_model, make_sequence_model,
    make_unit_model, make_warped_interval_model, FinitePair, HaarLineModel, SequenceConfig, SequenceModel,
    WarpedModel,
};
use mra_core::solver::fixtures::{four_dim_fixture, ScalingFixture};
use mra_core::{Complex64, StateVector, UnitaryPair};

use crate::config::RunConfig;

/// Coefficient window used when reading `h_n` off a grid model.
pub const TSR_WINDOW: std::ops::RangeInclusive<i64> = -4..=5;

pub enum View {
    Haar(HaarLineModel),
    Warped(WarpedModel),
    Sequence(SequenceModel),
    Finite(FinitePair),
    Fixture(ScalingFixture),
}

pub struct Model {
    pub name: String,
    pub pair: Arc<dyn UnitaryPair>,
    pub system: Option<ScalingSystem>,
    pub view: View,
}

impl Model {
    /// Translation window on which orthonormality is checked.
    pub fn shift_window(&self) -> std::ops::RangeInclusive<i64> {
        match &self.view {
            View::Finite(p) => -(p.dim() as i64 - 1)..=p.dim() as i64 - 1,
            View::Fixture(f) => -(f.pair.dim() as i64 - 1)..=f.pair.dim() as i64 - 1,
            _ => -6..=6,
        }
    }

    pub fn finite_pair(&self) -> Option<&FinitePair> {
        match &self.view {
            View::Finite(p) => Some(p),
            View::Fixture(f) => Some(&f.pair),
            _ => None,
        }
    }

    pub fn is_grid(&self) -> bool {
        matches!(self.view, View::Haar(_) | View::Warped(_) | View::Sequence(_))
    }
}

fn manual_system(name: &str, pair: Arc<dyn UnitaryPair>, phi: StateVector, h: Filter) -> ScalingSystem {
    ScalingSystem {
        model: name.into(),
        h_real: h.is_real(pair.tolerance()),
        seed: phi.clone(),
        phi,
        pair,
        h,
    }
}

pub fn build(cfg: &RunConfig) -> Result<Model> {
    let model = match cfg.model.as_str() {
        "haar" => {
            let m = make_haar_line_model(cfg.level, cfg.extent)?;
            let pair: Arc<dyn UnitaryPair> = m.pair.clone();
            let sys = extract_tsr_coefficients(&m.phi, pair.clone(), TSR_WINDOW)?;
            Model {
                name: "haar".into(),
                pair,
                system: Some(sys),
                view: View::Haar(m),
            }
        }
        "warped" => {
            let m = make_warped_interval_model(cfg.level, cfg.extent)?;
            let pair: Arc<dyn UnitaryPair> = m.pair.clone();
            let sys = extract_tsr_coefficients(&m.rho, pair.clone(), TSR_WINDOW)?;
            Model {
                name: "warped".into(),
                pair,
                system: Some(sys),
                view: View::Warped(m),
            }
        }
        "sequence" => {
            let m = make_sequence_model(SequenceConfig {
                lmax: cfg.truncation,
                level: cfg.level,
                half_extent: cfg.extent,
                ..SequenceConfig::default()
            })?;
            let pair: Arc<dyn UnitaryPair> = m.pair.clone();
            let sys = extract_tsr_coefficients(&m.phi, pair.clone(), TSR_WINDOW)?;
            Model {
                name: "sequence".into(),
                pair,
                system: Some(sys),
                view: View::Sequence(m),
            }
        }
        "counterexample" => {
            let sys = make_complex_counterexample_system()?;
            let carrier = make_haar_line_model(4, 96)?;
            Model {
                name: "counterexample".into(),
                pair: sys.pair.clone(),
                system: Some(sys),
                view: View::Haar(carrier),
            }
        }
        "c2" => {
            let m = make_finite_pair_model([1.0, 0.0, 0.0], [0.0, 0.0, 1.0], cfg.a0)?;
            let pair: Arc<dyn UnitaryPair> = m.pair.clone();
            Model {
                name: "c2".into(),
                pair,
                system: None,
                view: View::Finite((*m.pair).clone()),
            }
        }
        "unit" => {
            let (m, phi) = make_unit_model()?;
            let pair: Arc<dyn UnitaryPair> = m.pair.clone();
            let sys = manual_system("unit", pair.clone(), phi, Filter::from_real(0, &[1.0]));
            Model {
                name: "unit".into(),
                pair,
                system: Some(sys),
                view: View::Finite((*m.pair).clone()),
            }
        }
        "fixture" => {
            let f = four_dim_fixture(cfg.seed)?;
            let pair: Arc<dyn UnitaryPair> = Arc::new(f.pair.clone());
            let phi = f.pair.vector(&f.phi)?;
            let sys = manual_system("fixture", pair.clone(), phi, f.h.clone());
            Model {
                name: "fixture".into(),
                pair,
                system: Some(sys),
                view: View::Fixture(f),
            }
        }
        other => anyhow::bail!("unknown model `{other}`"),
    };
    Ok(model)
}

/// The filter used by `solve-scaling` in fixed mode.
pub fn solver_filter(cfg: &RunConfig, model: &Model) -> Filter {
    if let Some(taps) = &cfg.filter {
        return Filter::from_real(cfg.filter_offset, taps);
    }
    match &model.view {
        View::Fixture(f) => f.h.clone(),
        _ => Filter::new(0, vec![Complex64::new(1.0, 0.0)]),
    }
}
