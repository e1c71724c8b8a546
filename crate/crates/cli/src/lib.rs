//! Manifest-driven runs of the Otto engine experiments.

pub mod manifest;
pub mod output;

use std::path::{Path, PathBuf};

use serde_json::json;

use ottosim_core::protocols::{
    run_adiabaticity_sweep, run_benchmark, run_engine, run_equilibration, steady_state, AdiabaticityConfig,
    BathSequenceConfig, BenchmarkConfig, EngineConfig,
};
use ottosim_core::OttoError;

pub use manifest::{parse_manifest, parse_manifest_str, Experiment, Parameters, RunManifest};
use output::{real, write_outputs, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(#[source] OttoError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}

impl From<OttoError> for CliError {
    fn from(e: OttoError) -> Self {
        if e.is_configuration() {
            CliError::Config(e.to_string())
        } else {
            CliError::Numerical(e)
        }
    }
}

/// Everything a run produces, before it touches the file system.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    pub summary: serde_json::Value,
}

/// Runs `manifest` on a pool of `threads` workers (all cores when `None`).
pub fn execute(manifest: &RunManifest, threads: Option<usize>) -> Result<RunOutput, CliError> {
    faer::set_global_parallelism(faer::Par::Seq);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("cannot start {threads:?} threads: {e}")))?;
    let (tables, results) = pool.install(|| match &manifest.parameters {
        Parameters::Adiabaticity(c) => adiabaticity(c),
        Parameters::Equilibrate(c) => equilibrate(c),
        Parameters::Engine(c) => engine(c),
        Parameters::Benchmark(c) => benchmark(c),
    })?;
    let summary = json!({
        "experiment": manifest.experiment().as_str(),
        "parameters": manifest.parameters.to_json(),
        "results": results,
    });
    Ok(RunOutput { tables, summary })
}

/// [`execute`], then writes the outputs into `out` (or the manifest's
/// `output_dir`, or `./<experiment>`). Nothing is written if the run fails.
pub fn run(manifest: &RunManifest, out: Option<&Path>, threads: Option<usize>) -> Result<Vec<PathBuf>, CliError> {
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| manifest.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(manifest.experiment().as_str()));
    let output = execute(manifest, threads)?;
    write_outputs(&dir, &output.tables, &output.summary)
}

type Produced = Result<(Vec<Table>, serde_json::Value), CliError>;

fn engine(config: &EngineConfig) -> Produced {
    let run = run_engine(config)?;
    let mut table = Table::new(
        "cycles.csv",
        &[
            "cycle",
            "e_expanded_cold",
            "e_compressed_cold",
            "e_compressed_hot",
            "e_expanded_hot",
            "work",
            "heat_in",
            "efficiency",
            "power",
        ],
    );
    for r in &run.records {
        table.push(vec![
            r.cycle.to_string(),
            real(r.e_expanded_cold),
            real(r.e_compressed_cold),
            real(r.e_compressed_hot),
            real(r.e_expanded_hot),
            real(r.work),
            real(r.heat_in),
            real(r.efficiency),
            real(r.power),
        ]);
    }
    let steady = steady_state(&run.records);
    let results = json!({
        "steady_state": steady,
        "ideal_efficiency": 1.0 - 1.0 / config.omega,
        "carnot_efficiency": 1.0 - config.omega_t_cold / config.omega_t_hot,
        "final_cycle_start_change": run.start_changes.last(),
        "ramp_divisor": run.ramp_divisor,
        "ramp_unitarity_defect": run.ramp_unitarity_defect,
        "contact_unitarity_bound": run.contact_unitarity_bound,
    });
    Ok((vec![table], results))
}

fn benchmark(config: &BenchmarkConfig) -> Produced {
    let run = run_benchmark(config)?;
    let mut table = Table::new("convergence.csv", &["mode", "alpha", "divisor", "error"]);
    for r in &run.rows {
        table.push(vec![r.mode.as_str().into(), real(r.alpha), real(r.divisor), real(r.error)]);
    }
    let steps: Vec<_> = run
        .rows
        .iter()
        .map(|r| json!({"mode": r.mode, "alpha": r.alpha, "divisor": r.divisor, "dtau": r.dtau, "unitarity_defect": r.unitarity_defect}))
        .collect();
    let at_five: Vec<_> = run
        .slopes
        .iter()
        .filter_map(|s| {
            run.error_at(s.mode, s.alpha, 5.0).map(|e| json!({"mode": s.mode, "alpha": s.alpha, "error": e}))
        })
        .collect();
    let results = json!({ "slopes": run.slopes, "error_at_divisor_5": at_five, "steps": steps });
    Ok((vec![table], results))
}

fn equilibrate(config: &BathSequenceConfig) -> Produced {
    let run = run_equilibration(config)?;
    let mut series = Table::new("equilibration.csv", &["tau", "bath", "step", "phi0", "distance"]);
    for p in &run.points {
        series.push(vec![real(p.tau), p.bath.to_string(), p.step.to_string(), real(p.phi0), real(p.distance)]);
    }
    let mut scan = Table::new("thermal_scan.csv", &["omega_T", "distance"]);
    for &(t, d) in &run.scan.points {
        scan.push(vec![real(t), real(d)]);
    }
    let results = json!({
        "final_distance": run.final_distance(),
        "scan_argmin_omega_T": run.scan.argmin,
        "scan_min_distance": run.scan.min_distance,
    });
    Ok((vec![series, scan], results))
}

fn adiabaticity(config: &AdiabaticityConfig) -> Produced {
    let cells = run_adiabaticity_sweep(config)?;
    let mut table = Table::new("adiabaticity.csv", &["direction", "omega_T", "omega", "tau_alpha", "ratio"]);
    for c in &cells {
        table.push(vec![c.direction.as_str().into(), real(c.omega_t), real(c.omega), real(c.tau_alpha), real(c.ratio)]);
    }
    let ratios = cells.iter().map(|c| c.ratio);
    let results = json!({
        "cells": cells.len(),
        "min_ratio": ratios.clone().fold(f64::INFINITY, f64::min),
        "max_ratio": ratios.fold(f64::NEG_INFINITY, f64::max),
    });
    Ok((vec![table], results))
}
