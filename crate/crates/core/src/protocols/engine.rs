//! The four-stroke Otto cycle of the gas mode.
//!
//! Per cycle: compression `U rho U^dagger`, hot contact at the stiffened
//! frequency, expansion `U^dagger rho U`, cold contact at rest. The ramp
//! propagator, both contact channels and both bath states are built once.

use serde::{Deserialize, Serialize};

use super::{levels, positive, temperature};
use crate::channel::ContactChannel;
use crate::density::{energy, thermal_state, trace_distance, DensityOperator, StateTolerance};
use crate::error::{invalid, OttoError, Result};
use crate::hamiltonian::{
    alpha_max, coupled_hamiltonian_with, gas_hamiltonian, gaussian_coupling_matrix, CouplingSpec, StiffnessSchedule,
};
use crate::propagator::{stroke_propagator, Spectrum, StepRule, DEFAULT_DIVISOR};

/// Validity required of the gas state after every stroke.
pub const STROKE_TOLERANCE: StateTolerance = StateTolerance { hermiticity: 1e-8, trace: 1e-8, negativity: 1e-8 };

/// Cycles averaged for the steady-state figures.
pub const STEADY_WINDOW: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    pub omega: f64,
    pub tau_stroke: f64,
    pub tau_contact: f64,
    #[serde(rename = "omega_T_hot")]
    pub omega_t_hot: f64,
    #[serde(rename = "omega_T_cold")]
    pub omega_t_cold: f64,
    #[serde(default = "default_levels")]
    pub n_levels: usize,
    #[serde(default = "default_coupling")]
    pub coupling: CouplingSpec,
    #[serde(default = "default_cycles")]
    pub n_cycles: usize,
    /// Initial `eps / dtau` for the ramp; refined until the propagator is unitary.
    #[serde(default = "default_divisor")]
    pub divisor: f64,
}

fn default_levels() -> usize {
    41
}

fn default_coupling() -> CouplingSpec {
    CouplingSpec { phi0: 1.0, sigma: 1.0, x0: 1.0 }
}

fn default_cycles() -> usize {
    50
}

fn default_divisor() -> f64 {
    DEFAULT_DIVISOR
}

impl EngineConfig {
    fn base(omega: f64, tau_stroke: f64, tau_contact: f64) -> Self {
        Self {
            omega,
            tau_stroke,
            tau_contact,
            omega_t_hot: 5.0,
            omega_t_cold: 0.1,
            n_levels: default_levels(),
            coupling: default_coupling(),
            n_cycles: default_cycles(),
            divisor: default_divisor(),
        }
    }

    /// Strokes of 4 and contacts of 10.
    pub fn slow(omega: f64) -> Self {
        Self::base(omega, 4.0, 10.0)
    }

    /// Every stroke lasts 1.
    pub fn fast(omega: f64) -> Self {
        Self::base(omega, 1.0, 1.0)
    }

    pub fn alpha_max(&self) -> f64 {
        alpha_max(self.omega)
    }

    pub fn cycle_duration(&self) -> f64 {
        2.0 * self.tau_stroke + 2.0 * self.tau_contact
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 1.0) {
            return Err(invalid("omega", format!("frequency ratio must exceed 1, got {}", self.omega)));
        }
        positive("tau_stroke", self.tau_stroke)?;
        positive("tau_contact", self.tau_contact)?;
        temperature("omega_T_hot", self.omega_t_hot)?;
        temperature("omega_T_cold", self.omega_t_cold)?;
        levels("n_levels", self.n_levels)?;
        self.coupling.validate().map_err(|e| match e {
            OttoError::InvalidParameter { name, reason } => invalid(format!("coupling.{name}"), reason),
            other => other,
        })?;
        if self.n_cycles == 0 {
            return Err(invalid("n_cycles", "need at least one cycle"));
        }
        positive("divisor", self.divisor)?;
        Ok(())
    }
}

/// Stroke-end energies and derived quantities of one cycle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CycleRecord {
    /// 1-based.
    pub cycle: usize,
    pub e_expanded_cold: f64,
    pub e_compressed_cold: f64,
    pub e_compressed_hot: f64,
    pub e_expanded_hot: f64,
    pub work: f64,
    pub heat_in: f64,
    pub efficiency: f64,
    pub power: f64,
}

impl CycleRecord {
    pub fn from_energies(cycle: usize, e: [f64; 4], cycle_duration: f64) -> Self {
        let [e_expanded_cold, e_compressed_cold, e_compressed_hot, e_expanded_hot] = e;
        let work = -((e_expanded_hot - e_compressed_hot) + (e_compressed_cold - e_expanded_cold));
        let heat_in = e_compressed_hot - e_compressed_cold;
        Self {
            cycle,
            e_expanded_cold,
            e_compressed_cold,
            e_compressed_hot,
            e_expanded_hot,
            work,
            heat_in,
            efficiency: work / heat_in,
            power: work / cycle_duration,
        }
    }

    /// Heat given to the cold bath, given the energy that starts the next cycle.
    pub fn heat_rejected(&self, next_expanded_cold: f64) -> f64 {
        self.e_expanded_hot - next_expanded_cold
    }
}

#[derive(Clone, Debug)]
pub struct EngineRun {
    pub records: Vec<CycleRecord>,
    /// `D(rho_n, rho_{n+1})` between successive cycle-start states; entry `i`
    /// compares the start of cycle `i + 1` with the start of cycle `i + 2`.
    pub start_changes: Vec<f64>,
    /// Energy of the gas at the start of the cycle after the last one.
    pub e_final: f64,
    pub final_gas: DensityOperator,
    /// Divisor at which the ramp propagator met the unitarity tolerance.
    pub ramp_divisor: f64,
    pub ramp_unitarity_defect: f64,
    pub contact_unitarity_bound: f64,
}

impl EngineRun {
    /// Energy that starts cycle `i` (1-based), including the one after the last.
    pub fn start_energy(&self, cycle: usize) -> f64 {
        if cycle <= self.records.len() {
            self.records[cycle - 1].e_expanded_cold
        } else {
            self.e_final
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SteadyState {
    pub efficiency: f64,
    pub power: f64,
    pub work: f64,
    pub heat_in: f64,
    pub cycles_averaged: usize,
}

/// Means over the last [`STEADY_WINDOW`] cycles (or all, if fewer).
pub fn steady_state(records: &[CycleRecord]) -> SteadyState {
    let tail = &records[records.len().saturating_sub(STEADY_WINDOW)..];
    let n = tail.len() as f64;
    let mean = |f: fn(&CycleRecord) -> f64| tail.iter().map(f).sum::<f64>() / n;
    SteadyState {
        efficiency: mean(|r| r.efficiency),
        power: mean(|r| r.power),
        work: mean(|r| r.work),
        heat_in: mean(|r| r.heat_in),
        cycles_averaged: tail.len(),
    }
}

pub fn run_engine(config: &EngineConfig) -> Result<EngineRun> {
    config.validate()?;
    let basis = levels("n_levels", config.n_levels)?;
    let a_max = config.alpha_max();
    let h_rest = gas_hamiltonian(basis, 0.0);
    let h_stiff = gas_hamiltonian(basis, a_max);

    let schedule = StiffnessSchedule::compression(config.omega, config.tau_stroke)?;
    let rule = StepRule::for_schedule(basis, &schedule, config.divisor)?;
    let (u, used) = stroke_propagator(&schedule, basis, &rule)?;

    let single = gaussian_coupling_matrix(basis, &config.coupling)?;
    let hot_bath = thermal_state(&h_stiff, temperature("omega_T_hot", config.omega_t_hot)?)?;
    let cold_bath = thermal_state(&h_rest, temperature("omega_T_cold", config.omega_t_cold)?)?;
    let hot_spectrum = Spectrum::new(&coupled_hamiltonian_with(basis, a_max, config.coupling.phi0, &single))?;
    let hot = ContactChannel::new(&hot_spectrum, &hot_bath, config.tau_contact)?;
    drop(hot_spectrum);
    let cold_spectrum = Spectrum::new(&coupled_hamiltonian_with(basis, 0.0, config.coupling.phi0, &single))?;
    let cold = ContactChannel::new(&cold_spectrum, &cold_bath, config.tau_contact)?;
    drop(cold_spectrum);

    let mut gas = cold_bath.clone();
    let mut records = Vec::with_capacity(config.n_cycles);
    let mut start_changes = Vec::with_capacity(config.n_cycles);
    for cycle in 1..=config.n_cycles {
        let at = |stroke: &'static str| move |e: OttoError| OttoError::Cycle { cycle, stroke, source: Box::new(e) };
        let checked = |rho: DensityOperator, stroke: &'static str| -> Result<DensityOperator> {
            rho.validate(&STROKE_TOLERANCE).map_err(at(stroke))?;
            Ok(rho)
        };

        let e_expanded_cold = energy(&gas, &h_rest).map_err(at("cycle start"))?;
        let compressed = checked(u.evolve(&gas).map_err(at("compression"))?, "compression")?;
        let e_compressed_cold = energy(&compressed, &h_stiff).map_err(at("compression"))?;
        let heated = checked(hot.apply(&compressed).map_err(at("hot contact"))?, "hot contact")?;
        let e_compressed_hot = energy(&heated, &h_stiff).map_err(at("hot contact"))?;
        let expanded = checked(u.evolve_reversed(&heated).map_err(at("expansion"))?, "expansion")?;
        let e_expanded_hot = energy(&expanded, &h_rest).map_err(at("expansion"))?;
        let cooled = checked(cold.apply(&expanded).map_err(at("cold contact"))?, "cold contact")?;

        records.push(CycleRecord::from_energies(
            cycle,
            [e_expanded_cold, e_compressed_cold, e_compressed_hot, e_expanded_hot],
            config.cycle_duration(),
        ));
        start_changes.push(trace_distance(&gas, &cooled).map_err(at("cold contact"))?);
        gas = cooled;
    }
    let e_final = energy(&gas, &h_rest)?;
    Ok(EngineRun {
        records,
        start_changes,
        e_final,
        final_gas: gas,
        ramp_divisor: used.divisor,
        ramp_unitarity_defect: u.unitarity_defect(),
        contact_unitarity_bound: hot.unitarity_bound().max(cold.unitarity_bound()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_bookkeeping() {
        let r = CycleRecord::from_energies(3, [0.5, 1.5, 4.0, 2.0], 28.0);
        // work = -[(2 - 4) + (1.5 - 0.5)] = 1
        assert_eq!(r.work, 1.0);
        assert_eq!(r.heat_in, 2.5);
        assert_eq!(r.efficiency, 0.4);
        assert_eq!(r.power, 1.0 / 28.0);
        assert_eq!(r.heat_rejected(0.5), 1.5);
        assert_eq!(r.work + r.heat_rejected(0.5), r.heat_in);
    }

    #[test]
    fn steady_state_uses_last_cycles() {
        let records: Vec<CycleRecord> =
            (1..=12).map(|c| CycleRecord::from_energies(c, [0.0, 1.0, 2.0 + c as f64, 1.0], 1.0)).collect();
        let s = steady_state(&records);
        assert_eq!(s.cycles_averaged, 10);
        let want: f64 = (3..=12).map(|c| records[c - 1].efficiency).sum::<f64>() / 10.0;
        assert!((s.efficiency - want).abs() < 1e-15);
        assert_eq!(steady_state(&records[..3]).cycles_averaged, 3);
    }

    #[test]
    fn presets_and_validation() {
        let slow = EngineConfig::slow(2.0);
        assert_eq!((slow.tau_stroke, slow.tau_contact, slow.cycle_duration()), (4.0, 10.0, 28.0));
        assert_eq!(slow.alpha_max(), 3.0);
        assert!(slow.validate().is_ok());
        let fast = EngineConfig::fast(3.0);
        assert_eq!(fast.cycle_duration(), 4.0);
        let bad = EngineConfig { omega: 1.0, ..slow.clone() };
        assert!(matches!(bad.validate(), Err(OttoError::InvalidParameter { ref name, .. }) if name == "omega"));
        let bad = EngineConfig { coupling: CouplingSpec { sigma: 0.0, ..slow.coupling }, ..slow };
        assert!(
            matches!(bad.validate(), Err(OttoError::InvalidParameter { ref name, .. }) if name == "coupling.sigma")
        );
    }

    #[test]
    fn small_engine_runs_and_closes_its_ledger() {
        let config = EngineConfig { n_levels: 8, n_cycles: 4, ..EngineConfig::fast(2.0) };
        let run = run_engine(&config).unwrap();
        assert_eq!(run.records.len(), 4);
        assert_eq!(run.start_changes.len(), 4);
        for (i, r) in run.records.iter().enumerate() {
            let next = run.start_energy(i + 2);
            let drift = next - r.e_expanded_cold;
            assert!((r.heat_in - r.work - r.heat_rejected(next) - drift).abs() < 1e-12);
        }
    }
}
