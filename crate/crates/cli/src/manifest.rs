//! Replayable record of a command run.

use std::path::Path;

use geostep_core::config::PricingConfig;
use geostep_core::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Csv,
    Json,
}

/// A fully resolved command: configs are embedded, not referenced by path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    Price {
        config: PricingConfig,
        t: f64,
        x: f64,
        quantity: String,
    },
    Table {
        id: u8,
    },
    Greeks {
        config: PricingConfig,
        diff_against: Option<PricingConfig>,
        t: f64,
        x_lo: f64,
        x_hi: f64,
        n: usize,
        quantity: String,
        bump: f64,
    },
    Roots {
        config: PricingConfig,
        alpha: f64,
    },
    Verify {
        config: PricingConfig,
        t: f64,
        x: f64,
        paths: usize,
        dt: f64,
        seed: u64,
        antithetic: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub engine_version: String,
    pub gs_order: usize,
    pub format: Format,
    pub started_at: String,
    pub finished_at: Option<String>,
    #[serde(flatten)]
    pub command: Command,
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn new(command: Command, gs_order: usize, format: Format) -> Self {
        RunManifest {
            engine_version: env!("CARGO_PKG_VERSION").to_string(),
            gs_order,
            format,
            started_at: now(),
            finished_at: None,
            command,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest is serializable");
        std::fs::write(path, text + "\n").map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}
