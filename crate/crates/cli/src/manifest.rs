use std::path::{Path, PathBuf};

use rmlab_core::experiments::ExperimentConfig;
use serde::{Deserialize, Serialize};

/// What a run wrote and how it was asked for. The only file with a timestamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub config_path: Option<PathBuf>,
    pub config: Option<ExperimentConfig>,
    pub out_dir: PathBuf,
    pub created_at: String,
    pub version: String,
    pub master_seed: Option<u64>,
    /// Paths relative to `out_dir`.
    pub files: Vec<String>,
    pub verdict: Option<String>,
}

impl RunManifest {
    pub fn new(command: &str, out_dir: &Path) -> Self {
        RunManifest {
            command: command.to_string(),
            argv: std::env::args().collect(),
            config_path: None,
            config: None,
            out_dir: out_dir.to_path_buf(),
            created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: None,
            files: Vec::new(),
            verdict: None,
        }
    }

    /// Files listed but absent from `out_dir`.
    pub fn missing_files(&self) -> Vec<String> {
        self.files
            .iter()
            .filter(|f| !self.out_dir.join(f).is_file())
            .cloned()
            .collect()
    }
}
