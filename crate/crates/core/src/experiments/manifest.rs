use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use crate::error::Result;

/// JSON record written next to every run's outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: &'static str,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub wall_time_s: f64,
    pub outputs: Vec<PathBuf>,
    pub extras: serde_json::Map<String, serde_json::Value>,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, config: &ExperimentConfig) -> Self {
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION"),
            seed: config.seed,
            config: config.clone(),
            wall_time_s: 0.0,
            outputs: Vec::new(),
            extras: serde_json::Map::new(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}
