//! JSON config file shared by all subcommands. Flags override file values.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub problem: Option<String>,
    pub deg: Option<u32>,
    pub n: Option<usize>,
    pub noise: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub val: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub method: Option<String>,
    pub lr: Option<f64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub methods: Option<Vec<String>>,
    pub seeds: Option<usize>,
    pub n_train: Option<usize>,
    pub n_val: Option<usize>,
    pub n_test: Option<usize>,
}

/// A problem with the configuration itself (exit code 2).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| ConfigError(format!("config file {}: {e}", path.display())).into())
    }
}

/// Value from the flag, else the file, else the default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Like [`pick`] for values without a default.
pub fn require<T>(flag: Option<T>, file: Option<T>, name: &str) -> anyhow::Result<T> {
    flag.or(file)
        .ok_or_else(|| ConfigError(format!("missing required setting `{name}`")).into())
}
