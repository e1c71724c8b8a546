//! A gas mode brought into contact with a sequence of fresh thermal baths.
//!
//! Each contact applies the exact two-mode propagator `n_steps` times. The
//! reduced gas state after `s` applications is the contact channel of duration
//! `s * dtau` acting on the gas state at contact start, so the bath is traced
//! out only when it is replaced, as in the joint evolution.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{levels, non_empty, positive, temperature};
use crate::channel::{ContactChannel, ContactKernel};
use crate::density::{thermal_from_eigen, thermal_state, trace_distance, DensityOperator, StateTolerance, Temperature};
use crate::error::{invalid, Result};
use crate::fock::{FockBasis, Modes};
use crate::hamiltonian::{coupled_hamiltonian_with, gas_hamiltonian, gaussian_coupling_matrix, CouplingSpec};
use crate::linalg::HermitianEigen;
use crate::propagator::Spectrum;
use crate::Operator;

/// A run of identical baths sharing one coupling strength.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub phi0: f64,
    pub n_baths: usize,
    pub n_steps: usize,
    pub dtau: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSequenceConfig {
    #[serde(default = "default_segments")]
    pub segments: Vec<Segment>,
    pub alpha: f64,
    #[serde(rename = "omega_T_gas_initial")]
    pub omega_t_gas_initial: f64,
    #[serde(rename = "omega_T_bath")]
    pub omega_t_bath: f64,
    #[serde(default = "default_levels")]
    pub n_levels: usize,
    #[serde(default = "unit")]
    pub sigma: f64,
    #[serde(default = "unit")]
    pub x0: f64,
    /// Temperatures tried by the closing thermal-distance scan.
    #[serde(rename = "scan_omega_T", default = "default_scan_grid")]
    pub scan_omega_t: Vec<f64>,
}

fn default_segments() -> Vec<Segment> {
    vec![
        Segment { phi0: 1.0, n_baths: 5, n_steps: 10, dtau: 5.0 },
        Segment { phi0: 0.2, n_baths: 4, n_steps: 10, dtau: 5.0 },
        Segment { phi0: 0.05, n_baths: 3, n_steps: 10, dtau: 5.0 },
    ]
}

fn default_levels() -> usize {
    41
}

fn unit() -> f64 {
    1.0
}

/// `0.5, 0.55, ..., 6.0`, built from integers so the points are exact decimals.
pub fn default_scan_grid() -> Vec<f64> {
    (10..=120).map(|k| k as f64 * 5.0 / 100.0).collect()
}

impl BathSequenceConfig {
    /// The default bath sequence between two temperatures at stiffness `alpha`.
    pub fn new(alpha: f64, omega_t_gas_initial: f64, omega_t_bath: f64) -> Self {
        Self {
            segments: default_segments(),
            alpha,
            omega_t_gas_initial,
            omega_t_bath,
            n_levels: default_levels(),
            sigma: 1.0,
            x0: 1.0,
            scan_omega_t: default_scan_grid(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        non_empty("segments", &self.segments)?;
        for (i, s) in self.segments.iter().enumerate() {
            if !s.phi0.is_finite() {
                return Err(invalid(format!("segments[{i}].phi0"), "coupling strength must be finite"));
            }
            if s.n_baths == 0 {
                return Err(invalid(format!("segments[{i}].n_baths"), "need at least one bath"));
            }
            if s.n_steps == 0 {
                return Err(invalid(format!("segments[{i}].n_steps"), "need at least one step"));
            }
            positive(&format!("segments[{i}].dtau"), s.dtau)?;
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(invalid("alpha", format!("stiffness must be non-negative, got {}", self.alpha)));
        }
        temperature("omega_T_gas_initial", self.omega_t_gas_initial)?;
        temperature("omega_T_bath", self.omega_t_bath)?;
        levels("n_levels", self.n_levels)?;
        positive("sigma", self.sigma)?;
        if !(self.x0.is_finite() && self.x0 >= 0.0) {
            return Err(invalid("x0", format!("offset must be non-negative, got {}", self.x0)));
        }
        non_empty("scan_omega_T", &self.scan_omega_t)?;
        for &t in &self.scan_omega_t {
            temperature("scan_omega_T", t)?;
        }
        Ok(())
    }
}

/// `D(tr_b rho_total, rho_bath)` at one instant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EquilibrationPoint {
    pub tau: f64,
    /// 1-based position of the bath in the whole sequence.
    pub bath: usize,
    /// Applications of the step propagator since this bath was attached.
    pub step: usize,
    pub phi0: f64,
    pub distance: f64,
}

#[derive(Clone, Debug)]
pub struct EquilibrationRun {
    pub points: Vec<EquilibrationPoint>,
    pub final_gas: DensityOperator,
    pub bath_state: DensityOperator,
    pub scan: ThermalScan,
}

impl EquilibrationRun {
    pub fn final_distance(&self) -> f64 {
        self.points.last().map_or(f64::NAN, |p| p.distance)
    }
}

pub fn run_equilibration(config: &BathSequenceConfig) -> Result<EquilibrationRun> {
    config.validate()?;
    let basis = levels("n_levels", config.n_levels)?;
    let h_gas = gas_hamiltonian(basis, config.alpha);
    let bath = thermal_state(&h_gas, temperature("omega_T_bath", config.omega_t_bath)?)?;
    let mut gas = thermal_state(&h_gas, temperature("omega_T_gas_initial", config.omega_t_gas_initial)?)?;
    let single = gaussian_coupling_matrix(basis, &CouplingSpec::new(1.0, config.sigma, config.x0)?)?;
    let tol = StateTolerance::default();

    let mut points = Vec::new();
    let mut tau = 0.0;
    let mut bath_index = 0;
    for segment in &config.segments {
        let h = coupled_hamiltonian_with(basis, config.alpha, segment.phi0, &single);
        let spectrum = Spectrum::new(&h)?;
        let kernel = ContactKernel::new(&spectrum, &bath)?;
        let channels: Vec<ContactChannel> =
            (1..=segment.n_steps).into_par_iter().map(|s| kernel.channel(s as f64 * segment.dtau)).collect();
        for _ in 0..segment.n_baths {
            bath_index += 1;
            let start = gas.clone();
            let start_tau = tau;
            points.push(EquilibrationPoint {
                tau,
                bath: bath_index,
                step: 0,
                phi0: segment.phi0,
                distance: trace_distance(&start, &bath)?,
            });
            for (s, channel) in channels.iter().enumerate() {
                gas = channel.apply(&start)?;
                gas.validate(&tol)?;
                tau = start_tau + (s + 1) as f64 * segment.dtau;
                points.push(EquilibrationPoint {
                    tau,
                    bath: bath_index,
                    step: s + 1,
                    phi0: segment.phi0,
                    distance: trace_distance(&gas, &bath)?,
                });
            }
        }
    }
    let scan = thermal_distance_scan(&gas, config.alpha, &config.scan_omega_t)?;
    Ok(EquilibrationRun { points, final_gas: gas, bath_state: bath, scan })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThermalScan {
    /// `(omega_T, distance)` in grid order.
    pub points: Vec<(f64, f64)>,
    pub argmin: f64,
    pub min_distance: f64,
}

/// Trace distance from `rho` to the thermal state of `H(alpha)` at each
/// temperature of the grid.
pub fn thermal_distance_scan(rho: &DensityOperator, alpha: f64, grid: &[f64]) -> Result<ThermalScan> {
    non_empty("omega_T grid", grid)?;
    let basis: FockBasis = rho.basis();
    let eigen = HermitianEigen::new(gas_hamiltonian(basis, alpha).matrix())?;
    let mut points = Vec::with_capacity(grid.len());
    for &t in grid {
        let thermal = thermal_from_eigen(&eigen, Temperature::new(t)?, basis, Modes::Single);
        points.push((t, trace_distance(rho, &thermal)?));
    }
    let (argmin, min_distance) =
        points.iter().copied().fold((f64::NAN, f64::INFINITY), |best, p| if p.1 < best.1 { p } else { best });
    Ok(ThermalScan { points, argmin, min_distance })
}
