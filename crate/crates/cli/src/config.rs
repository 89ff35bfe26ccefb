//! Run configuration: file (TOML or JSON) overlaid by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mra_core::approximation::KWindow;
use mra_core::engine::WaveletVariant;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Search {
    /// Keep the filter fixed and search phases only.
    #[default]
    Fixed,
    /// Search phases and the filter taps on the configured window.
    Free,
}

/// Every key is optional in a file; missing keys take defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<String>,
    pub level: Option<u32>,
    pub extent: Option<i64>,
    pub jmin: Option<i64>,
    pub jmax: Option<i64>,
    pub kwindow: Option<String>,
    pub variant: Option<WaveletVariant>,
    pub tolerance: Option<f64>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub trials: Option<usize>,
    pub kmax: Option<u32>,
    pub lmax: Option<i64>,
    pub truncation: Option<usize>,
    pub attempts: Option<usize>,
    pub a0: Option<f64>,
    pub filter: Option<Vec<f64>>,
    pub filter_offset: Option<i64>,
    pub search: Option<Search>,
    pub filter_window: Option<(i64, i64)>,
    pub radii: Option<Vec<usize>>,
}

/// Fully resolved configuration, embedded in every output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: String,
    pub level: u32,
    pub extent: i64,
    pub jmin: i64,
    pub jmax: i64,
    pub kwindow: String,
    pub variant: WaveletVariant,
    pub tolerance: Option<f64>,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub trials: usize,
    pub kmax: u32,
    pub lmax: i64,
    pub truncation: usize,
    pub attempts: usize,
    pub a0: f64,
    pub filter: Option<Vec<f64>>,
    pub filter_offset: i64,
    pub search: Search,
    pub filter_window: (i64, i64),
    pub radii: Vec<usize>,
}

pub const MODELS: [&str; 7] = ["haar", "warped", "sequence", "c2", "counterexample", "fixture", "unit"];

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => toml::from_str(&text).with_context(|| format!("parsing {}", path.display())),
            Some("json") => serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display())),
            _ => bail!("config file {} must end in .toml or .json", path.display()),
        }
    }

    /// `other` wins wherever it is set.
    pub fn overlay(self, other: FileConfig) -> FileConfig {
        macro_rules! pick {
            ($($f:ident),*) => { FileConfig { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(
            model, level, extent, jmin, jmax, kwindow, variant, tolerance, seed, format, out, input, trials, kmax,
            lmax, truncation, attempts, a0, filter, filter_offset, search, filter_window, radii
        )
    }

    pub fn resolve(self) -> Result<RunConfig> {
        let model = self.model.unwrap_or_else(|| "haar".into());
        if !MODELS.contains(&model.as_str()) {
            bail!("unknown model `{model}` (expected one of {})", MODELS.join(", "));
        }
        let cfg = RunConfig {
            model,
            level: self.level.unwrap_or(4),
            extent: self.extent.unwrap_or(96),
            jmin: self.jmin.unwrap_or(-2),
            jmax: self.jmax.unwrap_or(2),
            kwindow: self.kwindow.unwrap_or_else(|| "covering".into()),
            variant: self.variant.unwrap_or_default(),
            tolerance: self.tolerance,
            seed: self.seed.unwrap_or(0),
            format: self.format.unwrap_or_default(),
            out: self.out,
            input: self.input,
            trials: self.trials.unwrap_or(32),
            kmax: self.kmax.unwrap_or(3),
            lmax: self.lmax.unwrap_or(8),
            truncation: self.truncation.unwrap_or(128),
            attempts: self.attempts.unwrap_or(32),
            a0: self.a0.unwrap_or(0.0),
            filter: self.filter,
            filter_offset: self.filter_offset.unwrap_or(0),
            search: self.search.unwrap_or_default(),
            filter_window: self.filter_window.unwrap_or((0, 1)),
            radii: self.radii.unwrap_or_else(|| vec![2, 4, 8]),
        };
        if cfg.jmin > cfg.jmax {
            bail!("jmin {} exceeds jmax {}", cfg.jmin, cfg.jmax);
        }
        if let Some(t) = cfg.tolerance {
            if !(t.is_finite() && t > 0.0) {
                bail!("tolerance must be positive, got {t}");
            }
        }
        if cfg.trials == 0 || cfg.attempts == 0 {
            bail!("trials and attempts must be positive");
        }
        cfg.k_window()?;
        Ok(cfg)
    }
}

impl RunConfig {
    /// `covering`, `covering+M`, a radius `N` (for `-N..=N`) or `lo:hi`.
    pub fn k_window(&self) -> Result<KWindow> {
        let s = self.kwindow.trim();
        if s == "covering" {
            return Ok(KWindow::Covering { margin: 1 });
        }
        if let Some(m) = s.strip_prefix("covering+") {
            let margin = m.parse().with_context(|| format!("bad kwindow margin `{m}`"))?;
            return Ok(KWindow::Covering { margin });
        }
        if let Some((a, b)) = s.split_once(':') {
            let lo: i64 = a.trim().parse().with_context(|| format!("bad kwindow `{s}`"))?;
            let hi: i64 = b.trim().parse().with_context(|| format!("bad kwindow `{s}`"))?;
            if lo > hi {
                bail!("empty kwindow `{s}`");
            }
            return Ok(KWindow::Fixed { lo, hi });
        }
        let n: i64 = s.parse().with_context(|| format!("bad kwindow `{s}`"))?;
        if n < 0 {
            bail!("kwindow radius must be non-negative");
        }
        Ok(KWindow::Fixed { lo: -n, hi: n })
    }
}
