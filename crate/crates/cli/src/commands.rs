//! Subcommand implementations. Each returns a JSON report, the list of
//! checks it ran and a CSV view of its main table.

use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use mra_core::approximation::{
    density_diagnostic, detail_coefficients, intersection_diagnostic, project_level, random_level_vector,
    reconstruct, DecompositionReport,
};
use mra_core::engine::{
    assess_k_invertibility, construct_mother_wavelet, cross_orthogonality, pairwise_orthonormality, tsr_residual,
    wavelet_coefficient_consistency, wavelet_record, ParityConvention, WaveletFamily,
};
use mra_core::hilbert::StateRecord;
use mra_core::operators::{trial_rng, verify_commutation_law, verify_unitarity};
use mra_core::solver::{solve_scaling_vector, FilterMode, SolverOptions};
use mra_core::{Complex64, MraError, StateVector};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{RunConfig, Search};
use crate::models::{self, Model, View};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    fn below(name: &str, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            threshold,
            passed: value < threshold,
            detail: None,
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    fn failed(name: &str, threshold: f64, err: &MraError) -> Self {
        Check {
            name: name.into(),
            value: f64::INFINITY,
            threshold,
            passed: false,
            detail: Some(err.to_string()),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

pub struct Outcome {
    pub report: Value,
    pub checks: Vec<Check>,
    pub table: Table,
}

fn fmt_complex(z: Complex64) -> String {
    format!("{:+.6}{:+.6}i", z.re, z.im)
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn pair_tolerance(cfg: &RunConfig, model: &Model) -> f64 {
    cfg.tolerance.unwrap_or(model.pair.tolerance())
}

fn family(model: &Model, cfg: &RunConfig) -> Result<WaveletFamily> {
    let sys = model
        .system
        .clone()
        .with_context(|| format!("model `{}` has no scaling vector", model.name))
        .map_err(|e| anyhow::Error::new(MraError::Config(e.to_string())))?;
    Ok(construct_mother_wavelet(Arc::new(sys), cfg.variant)?)
}

pub fn verify(cfg: &RunConfig, model: &Model) -> Result<Outcome> {
    let tol = pair_tolerance(cfg, model);
    let pair = model.pair.as_ref();
    let mut checks = Vec::new();
    let mut report = serde_json::Map::new();

    let unitarity = verify_unitarity(pair, cfg.trials, cfg.seed)?;
    checks.push(Check::below("unitarity", unitarity.max_residual(), tol));
    report.insert("unitarity".into(), serde_json::to_value(&unitarity)?);

    match verify_commutation_law(pair, cfg.kmax, cfg.lmax, cfg.trials, cfg.seed) {
        Ok(r) => {
            checks.push(Check::below("commutation", r.max_residual, tol));
            report.insert("commutation".into(), serde_json::to_value(&r)?);
        }
        Err(e) => checks.push(Check::failed("commutation", tol, &e)),
    }

    if let Some(sys) = &model.system {
        let window = model.shift_window();
        checks.push(Check::below("tsr", tsr_residual(sys)?, tol));
        let ortho = pairwise_orthonormality(&sys.phi, pair, window.clone(), Some(sys))?;
        let worst = ortho.max_deviation.max(ortho.coefficient_deviation.unwrap_or(0.0));
        checks.push(Check::below("orthonormality", worst, tol));
        report.insert("orthonormality".into(), serde_json::to_value(&ortho)?);
        report.insert("h".into(), serde_json::to_value(sys.h.taps())?);
        report.insert("h_real".into(), json!(sys.h_real));

        let fam = family(model, cfg)?;
        checks.push(Check::below("wavelet-norm", fam.norm_defect, tol));
        let consistency = wavelet_coefficient_consistency(&fam, window.clone())?;
        checks.push(Check::below("wavelet-consistency", consistency, tol.max(1e-10)));
        let cross = cross_orthogonality(&fam, window)?;
        let offending: Vec<String> = cross
            .values
            .iter()
            .filter(|v| v.value().norm() >= tol)
            .map(|v| format!("<Psi, tau^{} Phi> = {}", v.k, fmt_complex(v.value())))
            .collect();
        checks.push(
            Check::below("cross-orthogonality", cross.max_abs, tol).with_detail(format!(
                "{}; {}{}",
                offending.join(", "),
                cross.membership,
                if cross.informational { " (complex h)" } else { "" }
            )),
        );
        report.insert("cross_orthogonality".into(), serde_json::to_value(&cross)?);
    }

    let mut table = Table::new(&["check", "value", "threshold", "passed"]);
    for c in &checks {
        table.push(vec![c.name.clone(), num(c.value), num(c.threshold), c.passed.to_string()]);
    }
    Ok(Outcome {
        report: Value::Object(report),
        checks,
        table,
    })
}

fn samples(model: &Model, v: &StateVector) -> Result<(Table, Value)> {
    Ok(match &model.view {
        View::Haar(m) => {
            let mut t = Table::new(&["x", "re", "im"]);
            let h = m.pair.spacing();
            let mut rows = Vec::new();
            for (i, c) in v.coeffs().iter().enumerate() {
                let x = (v.offset() + i as i64) as f64 * h + 0.5 * h;
                t.push(vec![x.to_string(), c.re.to_string(), c.im.to_string()]);
                rows.push(json!({"x": x, "re": c.re, "im": c.im}));
            }
            (t, Value::Array(rows))
        }
        View::Warped(m) => {
            let mut t = Table::new(&["x", "re", "im"]);
            let mut rows = Vec::new();
            for i in 1..200 {
                let x = i as f64 / 200.0;
                let z = m.eval_x(v, x)?;
                t.push(vec![x.to_string(), z.re.to_string(), z.im.to_string()]);
                rows.push(json!({"x": x, "re": z.re, "im": z.im}));
            }
            (t, Value::Array(rows))
        }
        View::Sequence(m) => {
            let coords = m.coefficients(v)?;
            let mut t = Table::new(&["l", "re", "im"]);
            let mut rows = Vec::new();
            for (l, c) in coords.coeffs.iter().enumerate() {
                t.push(vec![l.to_string(), c.re.to_string(), c.im.to_string()]);
                rows.push(json!({"l": l, "re": c.re, "im": c.im}));
            }
            (t, json!({"coefficients": rows, "discarded_fraction": coords.discarded_fraction}))
        }
        View::Finite(_) | View::Fixture(_) => {
            let mut t = Table::new(&["index", "re", "im"]);
            let mut rows = Vec::new();
            for (i, c) in v.coeffs().iter().enumerate() {
                t.push(vec![i.to_string(), c.re.to_string(), c.im.to_string()]);
                rows.push(json!({"index": i, "re": c.re, "im": c.im}));
            }
            (t, Value::Array(rows))
        }
    })
}

pub fn wavelet(cfg: &RunConfig, model: &Model) -> Result<Outcome> {
    let tol = pair_tolerance(cfg, model);
    let fam = family(model, cfg)?;
    let record = wavelet_record(&fam, model.shift_window())?;
    let (table, sampled) = samples(model, &fam.psi)?;
    let checks = vec![Check::below("wavelet-norm", fam.norm_defect, tol)];
    Ok(Outcome {
        report: json!({
            "wavelet": record,
            "psi": fam.psi.to_record(),
            "samples": sampled,
        }),
        checks,
        table,
    })
}

fn parse_signal(path: &Path, model: &Model) -> Result<StateVector> {
    let space = model.pair.space().clone();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let header: Vec<String> = reader.headers()?.iter().map(|s| s.to_string()).collect();
    let by_index = header.first().map(|s| s == "index").unwrap_or(false);
    let by_x = header.first().map(|s| s == "x").unwrap_or(false);
    if !(by_index || by_x) || header.len() < 2 {
        bail!("signal header must start with `index` or `x` followed by a value column");
    }
    let mut cells: Vec<(i64, Complex64)> = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| -> Result<f64> {
            rec.get(i)
                .unwrap_or("0")
                .parse::<f64>()
                .with_context(|| format!("row {}: column {} is not a number", line + 2, i + 1))
        };
        let value = Complex64::new(field(1)?, if rec.len() > 2 { field(2)? } else { 0.0 });
        if by_index {
            let idx: i64 = rec
                .get(0)
                .unwrap_or("")
                .parse()
                .with_context(|| format!("row {}: bad index", line + 2))?;
            cells.push((idx, value));
        } else {
            let x = field(0)?;
            let per_unit = (1i64 << space.resolution) as f64;
            match &model.view {
                View::Warped(m) => {
                    if !(x > 0.0 && x < 1.0) {
                        bail!("row {}: x = {x} outside (0, 1)", line + 2);
                    }
                    let u = m.map.v(x);
                    cells.push(((u * per_unit).floor() as i64, value * (x * (1.0 - x)).sqrt()));
                }
                _ => cells.push(((x * per_unit).floor() as i64, value)),
            }
        }
    }
    if cells.is_empty() {
        bail!("signal file {} has no rows", path.display());
    }
    let lo = cells.iter().map(|c| c.0).min().unwrap();
    let hi = cells.iter().map(|c| c.0).max().unwrap() + 1;
    if !space.contains_window(lo, hi) {
        bail!("signal cells [{lo}, {hi}) exceed the model window {:?}", space.extent);
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); (hi - lo) as usize];
    for (i, v) in cells {
        coeffs[(i - lo) as usize] = v;
    }
    Ok(StateVector::new(space, lo, coeffs).trimmed())
}

fn grid_system(model: &Model) -> Result<()> {
    if !model.is_grid() || model.name == "counterexample" {
        return Err(MraError::Config(format!(
            "decomposition needs a grid model with real coefficients, not `{}`",
            model.name
        ))
        .into());
    }
    Ok(())
}

pub fn decompose(cfg: &RunConfig, model: &Model) -> Result<Outcome> {
    grid_system(model)?;
    let fam = family(model, cfg)?;
    let sys = fam.system.as_ref();
    let signal = match &cfg.input {
        Some(path) => parse_signal(path, model)?,
        None => {
            let mut rng = trial_rng(cfg.seed, 0);
            random_level_vector(sys, cfg.jmin - 1, -8..=8, &mut rng)?
        }
    };
    let window = cfg.k_window()?;
    let report = detail_coefficients(&signal, &fam, cfg.jmin..=cfg.jmax, &window, Default::default())?;
    let coarse = project_level(&signal, cfg.jmax, sys, &window)?.vector;
    let back = reconstruct(&report, &fam, &coarse)?;
    let residual = back.distance(&signal)?;
    let worst_energy = report.summaries.iter().map(|s| s.energy_defect).fold(0.0, f64::max);
    let worst_tail = report.summaries.iter().map(|s| s.tail_defect).fold(0.0, f64::max);
    let checks = vec![
        Check::below("energy-split", worst_energy, report.tolerance),
        Check {
            name: "nesting".into(),
            value: if report.nesting_ok { 0.0 } else { 1.0 },
            threshold: 0.5,
            passed: report.nesting_ok,
            detail: None,
        },
        Check::below("reconstruction", residual, 1e-10),
    ];
    let mut table = Table::new(&["j", "k", "re", "im"]);
    for (j, k, re, im) in report.csv_rows() {
        table.push(vec![j.to_string(), k.to_string(), re.to_string(), im.to_string()]);
    }
    Ok(Outcome {
        report: json!({
            "decomposition": report,
            "coarse": coarse.to_record(),
            "signal": signal.to_record(),
            "reconstruction_residual": residual,
            "worst_tail_defect": worst_tail,
        }),
        checks,
        table,
    })
}

pub fn reconstruct_cmd(cfg: &RunConfig, model: &Model) -> Result<Outcome> {
    grid_system(model)?;
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| MraError::Config("reconstruct needs --input <decompose output>".into()))?;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let body = doc.get("report").unwrap_or(&doc);
    let report: DecompositionReport = serde_json::from_value(
        body.get("decomposition").cloned().context("input has no `decomposition` block")?,
    )
    .context("malformed decomposition block")?;
    if report.model != model.name {
        return Err(MraError::WindowMismatch(format!(
            "decomposition was computed on `{}`, not `{}`",
            report.model, model.name
        ))
        .into());
    }
    let space = model.pair.space().clone();
    let coarse_rec: StateRecord =
        serde_json::from_value(body.get("coarse").cloned().context("input has no `coarse` vector")?)?;
    let coarse = StateVector::from_record(space.clone(), &coarse_rec)?;
    let fam = family(model, cfg)?;
    let back = reconstruct(&report, &fam, &coarse)?;
    let mut checks = Vec::new();
    let mut residual = None;
    if let Some(sig) = body.get("signal") {
        let rec: StateRecord = serde_json::from_value(sig.clone())?;
        let signal = StateVector::from_record(space, &rec)?;
        let r = back.distance(&signal)?;
        residual = Some(r);
        checks.push(Check::below("round-trip", r, 1e-10));
    }
    let (table, _) = samples(model, &back)?;
    Ok(Outcome {
        report: json!({
            "vector": back.to_record(),
            "round_trip_residual": residual,
            "levels": report.levels,
        }),
        checks,
        table,
    })
}

pub fn solve_scaling(cfg: &RunConfig, model: &Model) -> Result<Outcome> {
    let pair = model.finite_pair().ok_or_else(|| {
        MraError::Config(format!("solve-scaling needs a finite-dimensional model, not `{}`", model.name))
    })?;
    let mode = match cfg.search {
        Search::Fixed => FilterMode::Fixed(models::solver_filter(cfg, model)),
        Search::Free => FilterMode::Free {
            lo: cfg.filter_window.0,
            hi: cfg.filter_window.1,
        },
    };
    let options = SolverOptions {
        attempts: cfg.attempts,
        seed: cfg.seed,
        ..SolverOptions::default()
    };
    let report = solve_scaling_vector(pair, &mode, &options)?;
    let check = Check {
        name: "feasibility".into(),
        value: report.residual.unwrap_or(f64::INFINITY),
        threshold: report.threshold,
        passed: report.feasible,
        detail: report.reason.clone(),
    };
    let mut table = Table::new(&["l", "eigenvalue_re", "eigenvalue_im", "gamma_re", "gamma_im"]);
    for (l, (t, g)) in report.eigenvalues.iter().zip(&report.gamma).enumerate() {
        table.push(vec![l.to_string(), t.re.to_string(), t.im.to_string(), g.re.to_string(), g.im.to_string()]);
    }
    Ok(Outcome {
        report: serde_json::to_value(&report)?,
        checks: vec![check],
        table,
    })
}

pub fn report(cfg: &RunConfig, model: &Model) -> Result<Outcome> {
    let sys = model
        .system
        .as_ref()
        .ok_or_else(|| MraError::Config(format!("model `{}` has no scaling vector", model.name)))?;
    let floor = cfg.tolerance.unwrap_or(1e-6);
    let k = assess_k_invertibility(&sys.h, &cfg.radii, ParityConvention::ColumnParity, floor)?;
    let mut checks = vec![Check {
        name: "k-invertibility".into(),
        value: k.min_singular_value,
        threshold: floor,
        passed: k.numerically_invertible,
        detail: Some(k.verdict.clone()),
    }];
    let mut out = json!({ "k_matrix": k });
    if model.is_grid() && model.name != "counterexample" {
        let f = match &model.view {
            View::Warped(m) => m.from_x_function(-4.0, 4.0, |x| Complex64::new((-(x - 0.5).powi(2) * 20.0).exp(), 0.0))?,
            View::Haar(m) => m.pair.sample(-4.0, 4.0, |x| Complex64::new((-x * x).exp(), 0.0))?,
            View::Sequence(m) => m.pair.sample(-4.0, 4.0, |x| Complex64::new((-x * x).exp(), 0.0))?,
            _ => unreachable!(),
        };
        let jmax = cfg.jmax.max(0);
        let inter = intersection_diagnostic(&f, sys, jmax, Default::default())?;
        checks.push(Check {
            name: "intersection".into(),
            value: inter.norms.last().copied().unwrap_or(0.0),
            threshold: f64::NAN,
            passed: inter.verdict.passed(),
            detail: Some(format!("bound_ok = {:?}, nonincreasing = {}", inter.bound_ok, inter.nonincreasing)),
        });
        let samples: Vec<StateVector> = (0..8)
            .map(|t| model.pair.random_vector(&mut trial_rng(cfg.seed, t), 4))
            .collect();
        let dens = density_diagnostic(&samples, sys, cfg.jmin..=cfg.jmax, -16..=16, Default::default())?;
        out["intersection"] = serde_json::to_value(&inter)?;
        out["density"] = serde_json::to_value(&dens)?;
    }
    let mut table = Table::new(&["radius", "smallest_singular_value", "condition_estimate"]);
    for p in &k.probes {
        table.push(vec![p.radius.to_string(), p.smallest_singular_value.to_string(), p.condition_estimate.to_string()]);
    }
    Ok(Outcome {
        report: out,
        checks,
        table,
    })
}
