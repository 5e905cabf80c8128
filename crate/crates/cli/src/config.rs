use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Every knob of a run. Fields left unset fall back to command defaults;
/// stochastic commands refuse to run without a seed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub law: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paths: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<u64>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub return_lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub return_hi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<u64>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field.clone(); } )*
    };
}

impl ExperimentConfig {
    /// Read a TOML config, or a JSON config or run manifest (`.json`).
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        let bad = |e: &dyn std::fmt::Display| CliError::Validation(format!("config {}: {e}", path.display()));
        if path.extension().is_some_and(|e| e == "json") {
            let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| bad(&e))?;
            let value = match value.get("config") {
                Some(inner) if value.get("tool").is_some() => inner.clone(),
                _ => value,
            };
            serde_json::from_value(value).map_err(|e| bad(&e))
        } else {
            toml::from_str(&text).map_err(|e| bad(&e))
        }
    }

    /// Fields set in `top` replace those of `self`.
    pub fn overlay(mut self, top: &ExperimentConfig) -> Self {
        overlay!(self, top; command, law, x0, y0, steps, paths, workers, seed, output_dir, mode, x_max, bins,
            points, m, return_lo, return_hi, t_min, t_max, n_max, epochs);
        self
    }

    /// Counts must be at least 1 and reals finite.
    pub fn validate(&self) -> Result<(), CliError> {
        let counts = [
            ("steps", self.steps),
            ("paths", self.paths),
            ("workers", self.workers),
            ("bins", self.bins),
            ("points", self.points),
            ("n_max", self.n_max),
            ("epochs", self.epochs),
        ];
        for (name, value) in counts {
            if value == Some(0) {
                return Err(CliError::Validation(format!("`{name}` must be at least 1")));
            }
        }
        let reals = [
            ("x0", self.x0),
            ("y0", self.y0),
            ("x_max", self.x_max),
            ("M", self.m),
            ("return_lo", self.return_lo),
            ("return_hi", self.return_hi),
            ("t_min", self.t_min),
            ("t_max", self.t_max),
        ];
        for (name, value) in reals {
            if value.is_some_and(|v| !v.is_finite()) {
                return Err(CliError::Validation(format!("`{name}` must be finite")));
            }
        }
        Ok(())
    }

    pub fn law(&self) -> Result<&str, CliError> {
        self.law.as_deref().ok_or_else(|| missing("law"))
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| missing("seed"))
    }

    pub fn steps(&self) -> Result<u64, CliError> {
        self.steps.ok_or_else(|| missing("steps"))
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}

fn missing(field: &str) -> CliError {
    let flag = field.replace('_', "-");
    CliError::Validation(format!("missing `{field}` (pass --{flag} or set it in the config file)"))
}
