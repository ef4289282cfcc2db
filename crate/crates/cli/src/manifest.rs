//! Run manifest written next to the outputs. Passing it back through
//! `--config` repeats the run.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::settings::FileConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    /// Worker threads requested; 0 means the rayon default.
    pub threads: usize,
    /// Fully resolved settings of this run.
    pub config: FileConfig,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn file_name(command: &str) -> String {
        format!("{command}_manifest.json")
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(dir.join(Self::file_name(&self.command)), text + "\n")
    }
}
