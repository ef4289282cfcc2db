//! Resolved settings for each command: flags override the JSON config file,
//! which overrides the defaults below.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use multicopy::experiment::ExperimentConfig;
use multicopy::{DetectorModel, ReceiverKind};
use serde::{Deserialize, Serialize};

use crate::parse::real_grid;

/// Theory curves the `exponents` command can emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Curve {
    Kennedy,
    Gk,
    Dd,
    /// Helstrom measurement on the two lowest Fock levels.
    Helstrom2,
    /// Helstrom measurement at a dimension with negligible truncation.
    Helstrom,
}

impl Curve {
    pub const ALL: [Curve; 5] = [
        Curve::Kennedy,
        Curve::Gk,
        Curve::Dd,
        Curve::Helstrom2,
        Curve::Helstrom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Curve::Kennedy => "kennedy",
            Curve::Gk => "gk",
            Curve::Dd => "dd",
            Curve::Helstrom2 => "helstrom2",
            Curve::Helstrom => "helstrom",
        }
    }
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Curve {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Curve::ALL
            .into_iter()
            .find(|c| c.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| {
                format!(
                    "unknown receiver `{s}` (expected one of kennedy, gk, dd, helstrom2, helstrom)"
                )
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExponentsSettings {
    /// Source mean photon numbers; the receiver sees `efficiency * nbar`.
    pub nbar: Vec<f64>,
    pub receivers: Vec<Curve>,
    pub efficiency: f64,
    /// Fock dimension of the full Helstrom curve; chosen per point if absent.
    pub helstrom_dim: Option<usize>,
    pub detector: DetectorModel,
}

impl Default for ExponentsSettings {
    fn default() -> Self {
        ExponentsSettings {
            nbar: real_grid("0.05:1:0.05").expect("default grid"),
            receivers: Curve::ALL.to_vec(),
            efficiency: 1.0,
            helstrom_dim: None,
            detector: DetectorModel::ideal(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSettings {
    pub nbar: Vec<f64>,
    pub receivers: Vec<ReceiverKind>,
    /// Shared experiment settings; its `nbar_r` and `receiver` are replaced
    /// by each grid point.
    pub experiment: ExperimentConfig,
}

impl Default for SimulateSettings {
    fn default() -> Self {
        SimulateSettings {
            nbar: vec![0.2, 0.4, 0.6],
            receivers: ReceiverKind::ALL.to_vec(),
            experiment: ExperimentConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassicalSettings {
    /// `E / sigma^2` values; required.
    pub snr: Vec<f64>,
    pub m_grid: Vec<usize>,
    /// Monte Carlo trials per (snr, M); zero skips the simulation.
    pub trials: usize,
}

impl Default for ClassicalSettings {
    fn default() -> Self {
        ClassicalSettings {
            snr: Vec::new(),
            m_grid: vec![1, 2, 4, 8, 16, 32, 64],
            trials: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HelstromSettings {
    pub nbar: Vec<f64>,
    pub dims: Vec<usize>,
    /// Also emit a row at a dimension with negligible truncation.
    pub adequate: bool,
}

impl Default for HelstromSettings {
    fn default() -> Self {
        let mut nbar = vec![1e-4, 1e-3, 1e-2];
        nbar.extend(real_grid("0.05:1:0.05").expect("default grid"));
        HelstromSettings {
            nbar,
            dims: vec![2],
            adequate: true,
        }
    }
}

/// Contents of a `--config` file. Each command reads its own section.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponents: Option<ExponentsSettings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateSettings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classical: Option<ClassicalSettings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub helstrom: Option<HelstromSettings>,
}

impl FileConfig {
    /// Reads a config file, or the `config` record of a run manifest.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| format!("{} is not valid JSON: {e}", path.display()))?;
        let inner = match value.get("config") {
            Some(cfg) if value.get("command").is_some() => cfg.clone(),
            _ => value,
        };
        serde_json::from_value(inner).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }
}
