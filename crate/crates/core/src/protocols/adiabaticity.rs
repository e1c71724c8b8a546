//! How far a finite-time stiffness ramp departs from adiabatic transport.
//!
//! The reference energy is that of adiabatic transport in the untruncated
//! oscillator: the `n`-th eigenstate of the initial Hamiltonian keeps its
//! population and ends with energy `omega_f (n + 1/2)`, `omega_f` being the
//! final frequency ratio. Thermal states are passive and truncation only
//! raises eigenvalues, so the ratio of the actual to the reference energy is
//! never below one. Where the truncated spectrum departs from the ideal one the
//! ratio grows, which is how an insufficient basis shows up.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{levels, non_empty, positive, temperature};
use crate::density::{energy, thermal_from_eigen, Temperature};
use crate::error::{invalid, Result};
use crate::fock::{FockBasis, Modes};
use crate::hamiltonian::{alpha_max, gas_hamiltonian, StiffnessSchedule};
use crate::linalg::HermitianEigen;
use crate::propagator::{stroke_propagator, Propagator, StepRule, DEFAULT_DIVISOR};
use crate::Operator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `alpha: 0 -> omega^2 - 1`, applied as `U rho U^dagger`.
    Compression,
    /// The compression run backwards, `U^dagger rho U`.
    Expansion,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Compression => "compression",
            Direction::Expansion => "expansion",
        }
    }
}

/// `E_f / E_f^A` for one ramp.
pub fn adiabaticity_ratio(
    omega: f64,
    tau_alpha: f64,
    omega_t: Temperature,
    basis: FockBasis,
    direction: Direction,
    divisor: f64,
) -> Result<f64> {
    let ramp = Ramp::new(omega, tau_alpha, basis, divisor)?;
    ramp.ratio(omega_t, direction)
}

/// A compression propagator with the Hamiltonians at both ends.
struct Ramp {
    u: Propagator,
    omega: f64,
    rest: HermitianEigen,
    stiff: HermitianEigen,
    h_rest: crate::ModeOperator,
    h_stiff: crate::ModeOperator,
    basis: FockBasis,
}

impl Ramp {
    fn new(omega: f64, tau_alpha: f64, basis: FockBasis, divisor: f64) -> Result<Self> {
        if !(omega.is_finite() && omega >= 1.0) {
            return Err(invalid("omega", format!("frequency ratio must be at least 1, got {omega}")));
        }
        positive("tau_alpha", tau_alpha)?;
        let schedule = StiffnessSchedule::compression(omega, tau_alpha)?;
        let rule = StepRule::for_schedule(basis, &schedule, divisor)?;
        let (u, _) = stroke_propagator(&schedule, basis, &rule)?;
        let h_rest = gas_hamiltonian(basis, 0.0);
        let h_stiff = gas_hamiltonian(basis, alpha_max(omega));
        Ok(Self {
            u,
            omega,
            rest: HermitianEigen::new(h_rest.matrix())?,
            stiff: HermitianEigen::new(h_stiff.matrix())?,
            h_rest,
            h_stiff,
            basis,
        })
    }

    fn ratio(&self, omega_t: Temperature, direction: Direction) -> Result<f64> {
        let (initial, final_frequency, h_final) = match direction {
            Direction::Compression => (&self.rest, self.omega, &self.h_stiff),
            Direction::Expansion => (&self.stiff, 1.0, &self.h_rest),
        };
        let rho = thermal_from_eigen(initial, omega_t, self.basis, Modes::Single);
        let evolved = match direction {
            Direction::Compression => self.u.evolve(&rho)?,
            Direction::Expansion => self.u.evolve_reversed(&rho)?,
        };
        let actual = energy(&evolved, h_final)?;
        let reference = adiabatic_energy(initial, final_frequency, omega_t);
        Ok(actual / reference)
    }
}

/// `sum_n p_n omega_f (n + 1/2)`, with `p_n` the thermal populations of the
/// initial eigenstates in ascending order.
fn adiabatic_energy(initial: &HermitianEigen, final_frequency: f64, omega_t: Temperature) -> f64 {
    let ground = initial.values[0];
    let weights: Vec<f64> = initial.values.iter().map(|e| (-(e - ground) / omega_t.value()).exp()).collect();
    let z: f64 = weights.iter().sum();
    let levels = weights.iter().enumerate().map(|(n, w)| w * final_frequency * (n as f64 + 0.5));
    levels.sum::<f64>() / z
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdiabaticityConfig {
    #[serde(default = "default_omegas")]
    pub omegas: Vec<f64>,
    #[serde(default = "default_taus")]
    pub taus: Vec<f64>,
    #[serde(rename = "omega_T", default = "default_temperatures")]
    pub omega_t: Vec<f64>,
    #[serde(default = "default_levels")]
    pub n_levels: usize,
    #[serde(default = "default_divisor")]
    pub divisor: f64,
}

fn default_omegas() -> Vec<f64> {
    (5..=12).map(|k| k as f64 / 4.0).collect()
}

fn default_taus() -> Vec<f64> {
    vec![0.25, 0.5, 1.0, 2.0, 4.0, 8.0]
}

fn default_temperatures() -> Vec<f64> {
    vec![0.1, 5.0]
}

fn default_levels() -> usize {
    41
}

fn default_divisor() -> f64 {
    DEFAULT_DIVISOR
}

impl Default for AdiabaticityConfig {
    fn default() -> Self {
        Self {
            omegas: default_omegas(),
            taus: default_taus(),
            omega_t: default_temperatures(),
            n_levels: default_levels(),
            divisor: default_divisor(),
        }
    }
}

impl AdiabaticityConfig {
    pub fn validate(&self) -> Result<()> {
        non_empty("omegas", &self.omegas)?;
        non_empty("taus", &self.taus)?;
        non_empty("omega_T", &self.omega_t)?;
        for &w in &self.omegas {
            if !(w.is_finite() && w >= 1.0) {
                return Err(invalid("omegas", format!("frequency ratios must be at least 1, got {w}")));
            }
        }
        for &t in &self.taus {
            positive("taus", t)?;
        }
        for &t in &self.omega_t {
            temperature("omega_T", t)?;
        }
        levels("n_levels", self.n_levels)?;
        positive("divisor", self.divisor)?;
        Ok(())
    }
}

/// One row of the sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AdiabaticityCell {
    pub direction: Direction,
    pub omega_t: f64,
    pub omega: f64,
    pub tau_alpha: f64,
    pub ratio: f64,
}

/// Every `(direction, omega_T, omega, tau)` cell, ordered by direction, then
/// temperature, then `omega`, then `tau`. One propagator serves all
/// temperatures and both directions of a `(omega, tau)` pair.
pub fn run_adiabaticity_sweep(config: &AdiabaticityConfig) -> Result<Vec<AdiabaticityCell>> {
    config.validate()?;
    let basis = levels("n_levels", config.n_levels)?;
    let pairs: Vec<(f64, f64)> = config.omegas.iter().flat_map(|&w| config.taus.iter().map(move |&t| (w, t))).collect();
    let per_pair: Vec<Vec<AdiabaticityCell>> = pairs
        .par_iter()
        .map(|&(omega, tau)| {
            let ramp = Ramp::new(omega, tau, basis, config.divisor)?;
            let mut cells = Vec::new();
            for direction in [Direction::Compression, Direction::Expansion] {
                for &t in &config.omega_t {
                    let ratio = ramp.ratio(temperature("omega_T", t)?, direction)?;
                    cells.push(AdiabaticityCell { direction, omega_t: t, omega, tau_alpha: tau, ratio });
                }
            }
            Ok(cells)
        })
        .collect::<Result<_>>()?;
    let mut cells: Vec<AdiabaticityCell> = per_pair.into_iter().flatten().collect();
    let rank = |d: Direction| d as usize;
    let t_index = |t: f64| config.omega_t.iter().position(|&x| x == t).unwrap_or(0);
    cells.sort_by_key(|c| (rank(c.direction), t_index(c.omega_t)));
    Ok(cells)
}
