//! Experiment configuration (TOML). Relative paths are resolved against the
//! directory holding the config file.
//!
//! ```toml
//! dataset = "synthetic.csv"
//! split = "2015-06"
//! models = ["SVR", "MDPSO-SVR"]
//! repetitions = 50
//! seed = 1
//! output = "results"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use mdpso_core::timeseries::YearMonth;
use mdpso_core::wrapper::ModelKind;
use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dataset: PathBuf,
    split: String,
    models: Vec<String>,
    repetitions: usize,
    seed: u64,
    output: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    /// Last month of the training partition.
    pub split: YearMonth,
    pub models: Vec<ModelKind>,
    pub repetitions: usize,
    pub seed: u64,
    pub output: PathBuf,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base).map_err(|message| Error::Config {
            path: path.to_path_buf(),
            message,
        })
    }

    /// Parses and validates; relative paths are joined onto `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, String> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| e.message().to_string())?;
        let split: YearMonth = raw.split.parse().map_err(|e| format!("split: {e}"))?;
        if raw.models.is_empty() {
            return Err("models: the roster is empty".into());
        }
        let mut models = Vec::with_capacity(raw.models.len());
        for name in &raw.models {
            let m: ModelKind = name.parse().map_err(|e| format!("models: {e}"))?;
            if models.contains(&m) {
                return Err(format!("models: `{name}` is listed twice"));
            }
            models.push(m);
        }
        if raw.repetitions == 0 {
            return Err("repetitions must be at least 1".into());
        }
        Ok(Self {
            dataset: base.join(raw.dataset),
            split,
            models,
            repetitions: raw.repetitions,
            seed: raw.seed,
            output: base.join(raw.output),
        })
    }
}
