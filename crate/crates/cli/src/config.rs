use std::path::{Path, PathBuf};

use anyhow::Context;
use cursive_cut::corpus::DEFAULT_TOLERANCE;
use cursive_cut::neural::TrainConfig;
use cursive_cut::pipeline::PipelineConfig;
use serde::{Deserialize, Serialize};

/// Settings shared by every subcommand. Loaded from a JSON file; fields
/// left out keep the library defaults, and command-line flags win over both.
///
/// ```json
/// {"pipeline": {"seg": {"n": 30}, "features": {"window_cols": 24}},
///  "train": {"hidden": 16}, "tolerance": 3}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub pipeline: PipelineConfig,
    pub train: TrainConfig,
    pub tolerance: usize,
    /// Worker threads for per-word evaluation; `None` lets rayon decide.
    pub jobs: Option<usize>,
    pub port: u16,
    pub model: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub static_dir: Option<PathBuf>,
}

impl Default for CliConfig {
    fn default() -> Self {
        CliConfig {
            pipeline: PipelineConfig::default(),
            train: TrainConfig::default(),
            tolerance: DEFAULT_TOLERANCE,
            jobs: None,
            port: 8080,
            model: None,
            labels: None,
            static_dir: None,
        }
    }
}

impl CliConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}
