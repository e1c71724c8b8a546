//! Run manifests: `{"experiment": ..., "parameters": {...}, "output_dir": ...}`.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ottosim_core::protocols::{AdiabaticityConfig, BathSequenceConfig, BenchmarkConfig, EngineConfig};
use ottosim_core::OttoError;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Adiabaticity,
    Equilibrate,
    Engine,
    Benchmark,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Adiabaticity => "adiabaticity",
            Experiment::Equilibrate => "equilibrate",
            Experiment::Engine => "engine",
            Experiment::Benchmark => "benchmark",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Validated parameters of one experiment.
#[derive(Clone, Debug, PartialEq)]
pub enum Parameters {
    Adiabaticity(AdiabaticityConfig),
    Equilibrate(BathSequenceConfig),
    Engine(EngineConfig),
    Benchmark(BenchmarkConfig),
}

impl Parameters {
    pub fn experiment(&self) -> Experiment {
        match self {
            Parameters::Adiabaticity(_) => Experiment::Adiabaticity,
            Parameters::Equilibrate(_) => Experiment::Equilibrate,
            Parameters::Engine(_) => Experiment::Engine,
            Parameters::Benchmark(_) => Experiment::Benchmark,
        }
    }

    /// The parameters with every default filled in.
    pub fn to_json(&self) -> serde_json::Value {
        let v = match self {
            Parameters::Adiabaticity(c) => serde_json::to_value(c),
            Parameters::Equilibrate(c) => serde_json::to_value(c),
            Parameters::Engine(c) => serde_json::to_value(c),
            Parameters::Benchmark(c) => serde_json::to_value(c),
        };
        v.expect("configurations serialize to JSON")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub parameters: Parameters,
    pub output_dir: Option<PathBuf>,
}

impl RunManifest {
    pub fn experiment(&self) -> Experiment {
        self.parameters.experiment()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    experiment: Experiment,
    parameters: serde_json::Value,
    #[serde(default)]
    output_dir: Option<PathBuf>,
}

pub fn parse_manifest(path: &Path) -> Result<RunManifest, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read manifest {}: {e}", path.display())))?;
    parse_manifest_str(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_manifest_str(text: &str) -> Result<RunManifest, CliError> {
    let raw: RawManifest =
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("malformed manifest: {e}")))?;
    let parameters = match raw.experiment {
        Experiment::Adiabaticity => {
            Parameters::Adiabaticity(typed(raw.parameters, |c: &AdiabaticityConfig| c.validate())?)
        }
        Experiment::Equilibrate => {
            Parameters::Equilibrate(typed(raw.parameters, |c: &BathSequenceConfig| c.validate())?)
        }
        Experiment::Engine => Parameters::Engine(typed(raw.parameters, |c: &EngineConfig| c.validate())?),
        Experiment::Benchmark => Parameters::Benchmark(typed(raw.parameters, |c: &BenchmarkConfig| c.validate())?),
    };
    Ok(RunManifest { parameters, output_dir: raw.output_dir })
}

fn typed<T: serde::de::DeserializeOwned>(
    value: serde_json::Value,
    validate: impl Fn(&T) -> ottosim_core::Result<()>,
) -> Result<T, CliError> {
    let config: T = serde_json::from_value(value).map_err(|e| CliError::Config(format!("parameters: {e}")))?;
    validate(&config).map_err(|e| match e {
        OttoError::InvalidParameter { name, reason } => {
            CliError::Config(format!("parameters.{name} out of range: {reason}"))
        }
        other => CliError::Config(format!("parameters: {other}")),
    })?;
    Ok(config)
}
