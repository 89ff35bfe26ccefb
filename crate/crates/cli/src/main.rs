//! `mra`: verification and decomposition runs from the command line.

mod commands;
mod config;
mod models;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use mra_core::engine::WaveletVariant;
use mra_core::{Generator, MraError};
use serde_json::json;

use config::{FileConfig, Format, RunConfig, Search};

#[derive(Parser, Debug)]
#[command(name = "mra", version, about = "Multiresolution analysis from a unitary pair")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Check unitarity, the commutation law, the two-scale relation and orthonormality.
    Verify,
    /// Build the mother wavelet and sample it.
    Wavelet,
    /// Detail coefficients of a signal over a level range.
    Decompose,
    /// Rebuild a vector from `decompose` output.
    Reconstruct,
    /// Solve for a scaling vector in a finite-dimensional model.
    SolveScaling,
    /// K-matrix, intersection and density diagnostics.
    Report,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Wavelet => "wavelet",
            Command::Decompose => "decompose",
            Command::Reconstruct => "reconstruct",
            Command::SolveScaling => "solve-scaling",
            Command::Report => "report",
        }
    }
}

fn parse_variant(s: &str) -> Result<WaveletVariant, String> {
    serde_json::from_value(json!(s)).map_err(|_| format!("unknown variant `{s}` (expected standard or alternate)"))
}

#[derive(Args, Debug, Default)]
struct Flags {
    #[arg(long, global = true)]
    model: Option<String>,
    /// TOML or JSON file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    level: Option<u32>,
    #[arg(long, global = true)]
    extent: Option<i64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    jmin: Option<i64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    jmax: Option<i64>,
    /// `covering`, `covering+M`, `N` or `lo:hi`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    kwindow: Option<String>,
    #[arg(long, global = true, value_parser = parse_variant)]
    variant: Option<WaveletVariant>,
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Signal CSV for `decompose`, or `decompose` JSON for `reconstruct`.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true)]
    attempts: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    a0: Option<f64>,
    #[arg(long, global = true, value_enum)]
    search: Option<Search>,
}

impl Flags {
    fn into_file_config(self) -> FileConfig {
        FileConfig {
            model: self.model,
            level: self.level,
            extent: self.extent,
            jmin: self.jmin,
            jmax: self.jmax,
            kwindow: self.kwindow,
            variant: self.variant,
            tolerance: self.tolerance,
            seed: self.seed,
            format: self.format,
            out: self.out,
            input: self.input,
            trials: self.trials,
            attempts: self.attempts,
            a0: self.a0,
            search: self.search,
            ..FileConfig::default()
        }
    }
}

/// Exit code for an error: 2 for usage and configuration problems, 1 for a
/// computation that could not be certified.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<MraError>() {
        Some(MraError::Config(_))
        | Some(MraError::UnsupportedFamily)
        | Some(MraError::WindowMismatch(_))
        | Some(MraError::DomainBoundary(_)) => 2,
        Some(_) => 1,
        None => 2,
    }
}

/// Level vectors are `π^{-j} τ^k Φ`, so a `π` exponent names the level.
fn level_hint(err: &anyhow::Error) -> String {
    match err.downcast_ref::<MraError>() {
        Some(MraError::WindowOverflow { generator: Generator::Pi, exponent, .. })
        | Some(MraError::ResolutionOverflow { generator: Generator::Pi, exponent }) => {
            format!(" (level j = {})", -exponent)
        }
        _ => String::new(),
    }
}

fn resolve(cli_flags: Flags) -> Result<RunConfig> {
    let base = match &cli_flags.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    base.overlay(cli_flags.into_file_config()).resolve()
}

fn render(command: Command, cfg: &RunConfig, outcome: &commands::Outcome) -> Result<String> {
    let failed: Vec<&str> = outcome.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    match cfg.format {
        Format::Json => {
            let doc = json!({
                "tool": "mra",
                "version": env!("CARGO_PKG_VERSION"),
                "command": command.name(),
                "config": cfg,
                "seed": cfg.seed,
                "timestamp": timestamp,
                "report": outcome.report,
                "checks": outcome.checks,
                "verdict": { "passed": failed.is_empty(), "failed_checks": failed },
            });
            Ok(serde_json::to_string_pretty(&doc)? + "\n")
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&outcome.table.header)?;
            for row in &outcome.table.rows {
                w.write_record(row)?;
            }
            let body = String::from_utf8(w.into_inner()?)?;
            Ok(format!(
                "# tool=mra version={} command={} seed={} timestamp={}\n# config={}\n{body}",
                env!("CARGO_PKG_VERSION"),
                command.name(),
                cfg.seed,
                timestamp,
                serde_json::to_string(cfg)?
            ))
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = resolve(cli.flags).map_err(|e| MraError::Config(format!("{e:#}")))?;
    let model = models::build(&cfg)?;
    let outcome = match cli.command {
        Command::Verify => commands::verify(&cfg, &model)?,
        Command::Wavelet => commands::wavelet(&cfg, &model)?,
        Command::Decompose => commands::decompose(&cfg, &model)?,
        Command::Reconstruct => commands::reconstruct_cmd(&cfg, &model)?,
        Command::SolveScaling => commands::solve_scaling(&cfg, &model)?,
        Command::Report => commands::report(&cfg, &model)?,
    };
    let text = render(cli.command, &cfg, &outcome)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|e| MraError::Config(format!("writing {}: {e}", path.display())))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    for c in outcome.checks.iter().filter(|c| !c.passed) {
        eprintln!(
            "FAILED {}: value {:e} (threshold {:e}){}",
            c.name,
            c.value,
            c.threshold,
            c.detail.as_deref().map(|d| format!(": {d}")).unwrap_or_default()
        );
    }
    Ok(outcome.checks.iter().all(|c| c.passed))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}{}", level_hint(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
