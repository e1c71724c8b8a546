//! The four numerical experiments: adiabaticity of a single ramp, equilibration
//! against a sequence of baths, the full engine cycle and the integrator
//! convergence benchmark.
//!
//! Configurations deserialize from JSON with unknown keys rejected; `validate`
//! reports the first out-of-range field by its key. Independent cells run on
//! the ambient rayon pool, so the caller decides the degree of parallelism.

pub mod adiabaticity;
pub mod benchmark;
pub mod engine;
pub mod equilibration;

pub use adiabaticity::{adiabaticity_ratio, run_adiabaticity_sweep, AdiabaticityCell, AdiabaticityConfig, Direction};
pub use benchmark::{run_benchmark, BenchmarkConfig, BenchmarkMode, BenchmarkRun, ConvergenceRow, SlopeFit};
pub use engine::{run_engine, steady_state, CycleRecord, EngineConfig, EngineRun, SteadyState};
pub use equilibration::{
    run_equilibration, thermal_distance_scan, BathSequenceConfig, EquilibrationPoint, EquilibrationRun, Segment,
    ThermalScan,
};

use crate::density::Temperature;
use crate::error::{invalid, Result};
use crate::fock::FockBasis;

pub(crate) fn positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be positive and finite, got {value}")))
    }
}

pub(crate) fn temperature(name: &str, value: f64) -> Result<Temperature> {
    Temperature::new(value).map_err(|_| invalid(name, format!("temperature must be positive and finite, got {value}")))
}

pub(crate) fn levels(name: &str, n: usize) -> Result<FockBasis> {
    FockBasis::new(n).map_err(|_| invalid(name, format!("need at least 2 levels, got {n}")))
}

pub(crate) fn non_empty<T>(name: &str, values: &[T]) -> Result<()> {
    if values.is_empty() {
        Err(invalid(name, "must not be empty"))
    } else {
        Ok(())
    }
}
