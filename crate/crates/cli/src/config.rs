use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

/// Settings read from `--config`; command-line flags take precedence.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub tol: Option<f64>,
    pub tight_tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub field: Option<PathBuf>,
    pub n: Option<usize>,
    pub axes: Option<Vec<usize>>,
    pub dt0: Option<f64>,
    pub max_steps: Option<usize>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

pub fn positive(name: &str, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        bail!("{name} must be a positive number, got {x}");
    }
    Ok(x)
}

pub fn non_negative(name: &str, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        bail!("{name} must be non-negative, got {x}");
    }
    Ok(x)
}

/// Creates the output directory if one was requested.
pub fn out_dir(out: Option<PathBuf>) -> Result<Option<PathBuf>> {
    if let Some(dir) = &out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(out)
}
