//! Run configuration shared by every subcommand.
//!
//! One TOML file holds all numeric settings. Each section is optional and
//! falls back to the library defaults; unknown keys are rejected by name.
//!
//! ```toml
//! version = 1
//!
//! [lfcc]
//! n_filters = 20
//!
//! [gmm]
//! n_components = 32
//!
//! [cost]
//! pi_spoof = 0.05
//!
//! [pa]
//! master_seed = 7
//! [pa.table.t60]
//! b = [0.3, 0.45]
//! ```

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use spoofkit::features::{CqccConfig, LfccConfig};
use spoofkit::gmm::TrainConfig;
use spoofkit::metrics::{CostModel, TandemOptions};
use spoofkit::pa_sim::{CategoryTable, SeedMode};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub version: u32,
    pub lfcc: LfccConfig,
    pub cqcc: CqccConfig,
    pub gmm: TrainConfig,
    pub cost: CostModel,
    pub tandem: TandemOptions,
    pub pa: PaSection,
    pub report: ReportSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            version: CONFIG_VERSION,
            lfcc: LfccConfig::default(),
            cqcc: CqccConfig::default(),
            gmm: TrainConfig::default(),
            cost: CostModel::default(),
            tandem: TandemOptions::default(),
            pa: PaSection::default(),
            report: ReportSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PaSection {
    pub master_seed: u64,
    pub mode: SeedMode,
    /// Overlay on the default category table.
    pub table: toml::Table,
}

impl Default for PaSection {
    fn default() -> Self {
        PaSection {
            master_seed: 0,
            mode: SeedMode::Train,
            table: toml::Table::new(),
        }
    }
}

impl PaSection {
    pub fn category_table(&self) -> Result<CategoryTable> {
        let text = toml::to_string(&self.table).context("re-serializing [pa.table]")?;
        CategoryTable::from_toml_str(&text).context("[pa.table]")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportSection {
    /// Submissions summarized in the boxplot data of `rank`.
    pub top_n: usize,
    /// Also write an SVG DET plot.
    pub plot: bool,
}

impl Default for ReportSection {
    fn default() -> Self {
        ReportSection {
            top_n: 10,
            plot: false,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        if cfg.version != CONFIG_VERSION {
            bail!(
                "unsupported config version {} (this build reads version {CONFIG_VERSION})",
                cfg.version
            );
        }
        cfg.pa.category_table()?;
        Ok(cfg)
    }

    /// Defaults when `path` is `None`.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                RunConfig::from_toml_str(&text).with_context(|| format!("config {}", p.display()))
            }
        }
    }

    /// Applies `--seed` to every seeded stage.
    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(s) = seed {
            self.gmm.seed = s;
            self.pa.master_seed = s;
        }
        self
    }
}
