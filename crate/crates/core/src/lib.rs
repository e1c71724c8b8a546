//! Simulation of a quantum Otto engine built from a three-dimensional harmonic
//! oscillator: one mode is the working gas, the other two serve as hot and
//! cold baths coupled in through a Gaussian central potential.
//!
//! Everything is dimensionless: energies in units of the uncompressed
//! oscillator quantum, time in oscillator periods, lengths in oscillator
//! lengths.

pub mod channel;
pub mod density;
pub mod error;
pub mod fock;
pub mod hamiltonian;
pub mod linalg;
pub mod propagator;
#[cfg(test)]
mod properties;
pub mod protocols;
pub mod quadrature;

pub use density::{
    energy, ground_state, partial_trace_bath, thermal_state, trace_distance, DensityOperator, StateTolerance,
    Temperature,
};
pub use error::{OttoError, Result};
pub use fock::{
    lowering_operator, oscillator_wavefunction, position_operator, raising_operator, tensor_product, CompositeOperator,
    FockBasis, ModeOperator, Modes, Operator,
};
pub use hamiltonian::{
    alpha_max, coupled_hamiltonian, gas_hamiltonian, gaussian_coupling_matrix, CouplingSpec, StiffnessSchedule,
};
pub use linalg::C64;
pub use propagator::{exact_propagator, rk5_propagator, step_size, Propagator, Spectrum, StepRule};
