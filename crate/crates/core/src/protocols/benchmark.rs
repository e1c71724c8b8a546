//! Step-size convergence of the Runge-Kutta stroke integrator.
//!
//! A thermal state at rest is evolved to `tau_final` under a stiffness that is
//! either switched on at once (`fixed`) or ramped linearly (`ramp`), at a range
//! of step divisors. The error of each run is its trace distance to the
//! finest-step run. Coarse steps are integrated as they are, without the
//! unitarity refinement used for production propagators.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{levels, non_empty, positive, temperature};
use crate::density::{thermal_state, trace_distance, DensityOperator};
use crate::error::{invalid, Result};
use crate::hamiltonian::{gas_hamiltonian, StiffnessSchedule};
use crate::propagator::{integrate_gas, step_size, steps_for, StepRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchmarkMode {
    /// Stiffness at its target from the first instant.
    Fixed,
    /// Stiffness rising linearly from 0 to its target at `tau_final`.
    Ramp,
}

impl BenchmarkMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BenchmarkMode::Fixed => "fixed",
            BenchmarkMode::Ramp => "ramp",
        }
    }

    fn schedule(self, alpha: f64, tau_final: f64) -> Result<StiffnessSchedule> {
        match self {
            BenchmarkMode::Fixed => StiffnessSchedule::constant(alpha, tau_final),
            BenchmarkMode::Ramp => StiffnessSchedule::new(0.0, alpha, tau_final),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    #[serde(default = "default_levels")]
    pub n_levels: usize,
    #[serde(rename = "omega_T", default = "default_temperature")]
    pub omega_t: f64,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_tau")]
    pub tau_final: f64,
    /// Values of `eps / dtau`; the largest is the reference.
    #[serde(default = "default_divisors")]
    pub divisors: Vec<f64>,
    #[serde(default = "default_modes")]
    pub modes: Vec<BenchmarkMode>,
}

fn default_levels() -> usize {
    101
}

fn default_temperature() -> f64 {
    5.0
}

fn default_alphas() -> Vec<f64> {
    vec![3.0, 8.0]
}

fn default_tau() -> f64 {
    5.0
}

fn default_divisors() -> Vec<f64> {
    vec![3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 16.0]
}

fn default_modes() -> Vec<BenchmarkMode> {
    vec![BenchmarkMode::Fixed, BenchmarkMode::Ramp]
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            n_levels: default_levels(),
            omega_t: default_temperature(),
            alphas: default_alphas(),
            tau_final: default_tau(),
            divisors: default_divisors(),
            modes: default_modes(),
        }
    }
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<()> {
        levels("n_levels", self.n_levels)?;
        temperature("omega_T", self.omega_t)?;
        non_empty("alphas", &self.alphas)?;
        for &a in &self.alphas {
            if !(a.is_finite() && a >= 0.0) {
                return Err(invalid("alphas", format!("stiffness must be non-negative, got {a}")));
            }
        }
        positive("tau_final", self.tau_final)?;
        if self.divisors.len() < 2 {
            return Err(invalid("divisors", "need a reference and at least one coarser divisor"));
        }
        for &d in &self.divisors {
            positive("divisors", d)?;
        }
        non_empty("modes", &self.modes)?;
        Ok(())
    }

    fn finest(&self) -> f64 {
        self.divisors.iter().copied().fold(f64::MIN, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub mode: BenchmarkMode,
    pub alpha: f64,
    pub divisor: f64,
    /// Step actually taken, after rounding the step count up.
    pub dtau: f64,
    pub error: f64,
    pub unitarity_defect: f64,
}

/// Least-squares slope of `ln error` against `ln dtau` for one configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlopeFit {
    pub mode: BenchmarkMode,
    pub alpha: f64,
    pub slope: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchmarkRun {
    pub rows: Vec<ConvergenceRow>,
    pub slopes: Vec<SlopeFit>,
}

impl BenchmarkRun {
    /// Error of the run at `divisor`, if it was part of the grid.
    pub fn error_at(&self, mode: BenchmarkMode, alpha: f64, divisor: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.mode == mode && r.alpha == alpha && r.divisor == divisor).map(|r| r.error)
    }
}

struct Cell {
    state: DensityOperator,
    dtau: f64,
    defect: f64,
}

/// Rows ordered by mode, then `alpha`, then divisor as listed.
pub fn run_benchmark(config: &BenchmarkConfig) -> Result<BenchmarkRun> {
    config.validate()?;
    let basis = levels("n_levels", config.n_levels)?;
    let rho0 = thermal_state(&gas_hamiltonian(basis, 0.0), temperature("omega_T", config.omega_t)?)?;
    let finest = config.finest();

    let jobs: Vec<(BenchmarkMode, f64, f64)> = config
        .modes
        .iter()
        .flat_map(|&m| config.alphas.iter().flat_map(move |&a| config.divisors.iter().map(move |&d| (m, a, d))))
        .collect();
    let cells: Vec<Cell> = jobs
        .par_iter()
        .map(|&(mode, alpha, divisor)| {
            let schedule = mode.schedule(alpha, config.tau_final)?;
            let rule = StepRule::new(basis.n_levels(), alpha, divisor)?;
            let u = integrate_gas(&schedule, basis, &rule)?;
            let steps = steps_for(config.tau_final, step_size(&rule));
            Ok(Cell { state: u.evolve(&rho0)?, dtau: config.tau_final / steps as f64, defect: u.unitarity_defect() })
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(jobs.len());
    let mut slopes = Vec::new();
    let per = config.divisors.len();
    for (group, chunk) in cells.chunks(per).enumerate() {
        let (mode, alpha, _) = jobs[group * per];
        let reference = &chunk[config.divisors.iter().position(|&d| d == finest).expect("finest is in the grid")];
        let mut fit = Vec::new();
        for (cell, &divisor) in chunk.iter().zip(&config.divisors) {
            let error = if divisor == finest { 0.0 } else { trace_distance(&cell.state, &reference.state)? };
            if error > 0.0 {
                fit.push((cell.dtau.ln(), error.ln()));
            }
            rows.push(ConvergenceRow { mode, alpha, divisor, dtau: cell.dtau, error, unitarity_defect: cell.defect });
        }
        slopes.push(SlopeFit { mode, alpha, slope: least_squares_slope(&fit), points: fit.len() });
    }
    Ok(BenchmarkRun { rows, slopes })
}

/// Slope of the ordinary least-squares line through `points`; NaN for fewer
/// than two distinct abscissae.
pub fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if points.len() < 2 || sxx == 0.0 {
        return f64::NAN;
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<(f64, f64)> = [0.1f64, 0.2, 0.3, 0.5].iter().map(|&x| (x.ln(), (7.0 * x.powi(5)).ln())).collect();
        assert!((least_squares_slope(&pts) - 5.0).abs() < 1e-12);
        assert!(least_squares_slope(&pts[..1]).is_nan());
    }

    #[test]
    fn small_benchmark_layout() {
        let config = BenchmarkConfig {
            n_levels: 10,
            alphas: vec![3.0],
            divisors: vec![3.0, 4.0, 6.0, 8.0],
            tau_final: 1.0,
            ..Default::default()
        };
        let run = run_benchmark(&config).unwrap();
        assert_eq!(run.rows.len(), 8);
        assert_eq!(run.rows[0].mode, BenchmarkMode::Fixed);
        assert_eq!(run.rows[4].mode, BenchmarkMode::Ramp);
        assert_eq!(run.error_at(BenchmarkMode::Ramp, 3.0, 8.0), Some(0.0));
        assert!(run.rows.iter().filter(|r| r.divisor < 8.0).all(|r| r.error > 0.0));
        assert_eq!(run.slopes.len(), 2);
        assert!(run.slopes.iter().all(|s| s.points == 3 && s.slope > 3.0));
    }

    #[test]
    fn needs_a_reference() {
        let config = BenchmarkConfig { divisors: vec![5.0], ..Default::default() };
        assert!(config.validate().is_err());
    }
}
