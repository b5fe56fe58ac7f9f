//! Scenario files, Monte Carlo dispersions and the downrange sweep.

mod montecarlo;
mod scenario;
mod sweep;

pub use montecarlo::{
    run_monte_carlo, Dist, DispersionSpec, MonteCarloResult, MonteCarloSummary, RunSummary, Stats,
};
pub use scenario::{load_scenario, parse_scenario, preset, Scenario, PRESETS};
pub use sweep::{downrange_sweep, write_sweep_csv, SweepRow};

use std::path::PathBuf;

/// Configuration and I/O failures.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}: at `{field}`: {message}")]
    Schema {
        file: String,
        field: String,
        message: String,
    },

    #[error("{file}: {source}")]
    Invalid {
        file: String,
        #[source]
        source: crate::Error,
    },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

pub(crate) fn parse_toml<T: serde::de::DeserializeOwned>(text: &str, file: &str) -> Result<T, HarnessError> {
    let de = toml::Deserializer::parse(text).map_err(|e| HarnessError::Schema {
        file: file.to_string(),
        field: ".".to_string(),
        message: e.to_string(),
    })?;
    serde_path_to_error::deserialize(de).map_err(|e| HarnessError::Schema {
        file: file.to_string(),
        field: e.path().to_string(),
        message: e.into_inner().message().to_string(),
    })
}
