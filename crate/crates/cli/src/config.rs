use std::path::Path;

use rmlab_core::ensembles::parse_p;
use rmlab_core::experiments::{parse_z, ExperimentConfig};
use serde_json::{Map, Value};

/// Problems with the inputs; all map to exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Missing {
        path: String,
        source: std::io::Error,
    },
    #[error("config schema violation: {0}")]
    Schema(String),
    #[error("invalid {name}: {reason}")]
    Invalid { name: String, reason: String },
}

impl From<rmlab_core::LabError> for ConfigError {
    fn from(e: rmlab_core::LabError) -> Self {
        match e {
            rmlab_core::LabError::InvalidParameter { name, reason } => ConfigError::Invalid {
                name: name.to_string(),
                reason,
            },
            other => ConfigError::Schema(other.to_string()),
        }
    }
}

pub const SCHEMA_HELP: &str = "\
Config file: a JSON object with these keys (all optional except n or n_list):
  ensemble      \"ginibre\" | \"laplace_iid\" | \"lp_ball_global\" | \"lp_ball_rows\" (default ginibre)
  p             number >= 1 or \"inf\" (lp families; default 1)
  n             matrix side
  n_list        array of matrix sides
  z             \"re,im\" or [re, im] (default 0); deterministic part M = -z sqrt(n) Id
  z_points      array of shifts for potential comparisons (default [0, 0.5, 2])
  trials        trials per size (default 8)
  seed          master seed (default 0)
  gamma         index threshold exponent in (0,1) (default 0.5)
  alpha         integrability exponent in (0,2] (default 0.05)
  delta         sparsity fraction in (0,1] (default 0.1)
  rho_comp      compressibility radius > 0 (default 0.1)
  k_grid        subspace sizes as fractions of n in (0,1) (default [0.25, 0.5, 0.75])
  radial_tol, sector_tol, potential_tol   circular-law thresholds (0.05, 0.03, 0.05)
Flags override file values. Unknown keys are rejected.";

/// Reads a JSON config file into a key map.
pub fn read_config_map(path: &Path) -> Result<Map<String, Value>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Missing {
        path: path.display().to_string(),
        source,
    })?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(ConfigError::Schema("top level must be an object".into())),
        Err(e) => Err(ConfigError::Schema(e.to_string())),
    }
}

/// Validated config from a key map, filling defaults.
pub fn config_from_map(mut map: Map<String, Value>) -> Result<ExperimentConfig, ConfigError> {
    map.entry("ensemble").or_insert_with(|| Value::String("ginibre".into()));
    let cfg: ExperimentConfig =
        serde_json::from_value(Value::Object(map)).map_err(|e| ConfigError::Schema(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Loads and validates a config file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    config_from_map(read_config_map(path)?)
}

pub fn emit_config(cfg: &ExperimentConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("config serialises") + "\n"
}

fn invalid(name: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        name: name.into(),
        reason: reason.into(),
    }
}

pub fn p_value(text: &str) -> Result<Value, ConfigError> {
    let p = parse_p(text)?;
    Ok(if p.is_infinite() {
        Value::String("inf".into())
    } else {
        Value::from(p)
    })
}

pub fn z_value(text: &str) -> Result<Value, ConfigError> {
    let z = parse_z(text)?;
    Ok(Value::from(vec![z.re, z.im]))
}

pub fn usize_list(name: &str, text: &str) -> Result<Value, ConfigError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map(Value::from)
                .map_err(|_| invalid(name, format!("expected comma-separated integers, got {text:?}")))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Value::Array)
}

pub fn f64_list(name: &str, text: &str) -> Result<Value, ConfigError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map(Value::from)
                .map_err(|_| invalid(name, format!("expected comma-separated numbers, got {text:?}")))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Value::Array)
}
