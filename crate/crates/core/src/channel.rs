//! Gas-side view of a bath contact: `rho -> tr_b[U (rho (x) rho_b) U^dagger]`
//! for a fixed bath state and a time-independent coupled Hamiltonian.
//!
//! The map is stored as the matrix `C[(a,c),(b,d)] = sum_k K_k[a,c] conj(K_k[b,d])`
//! over its Kraus operators, so applying it to a gas state costs `n^4` and
//! the full two-mode propagator is never formed.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};

use crate::density::DensityOperator;
use crate::error::{OttoError, Result};
use crate::fock::{FockBasis, Modes, Operator};
use crate::linalg::{self, HermitianEigen, C64, ONE, ZERO};
use crate::propagator::{phase, Spectrum, UNITARITY_TOL};

/// Bath eigenstates lighter than this fraction of the heaviest one are dropped.
pub const POPULATION_CUTOFF: f64 = 1e-20;

#[derive(Clone, Debug)]
pub struct ContactChannel {
    choi: Mat<C64>,
    basis: FockBasis,
    duration: f64,
    unitarity_bound: f64,
}

/// Bath state and Hamiltonian eigenbasis, pre-contracted so that channels for
/// several contact durations share the expensive part.
pub struct ContactKernel<'a> {
    spectrum: &'a Spectrum,
    weights: Vec<f64>,
    /// `V^dagger (1 (x) Phi)` restricted to significant bath eigenvectors `Phi`.
    projected: Mat<C64>,
}

impl<'a> ContactKernel<'a> {
    pub fn new(spectrum: &'a Spectrum, bath: &DensityOperator) -> Result<Self> {
        let basis = spectrum.basis();
        if spectrum.modes() != Modes::Pair {
            return Err(OttoError::DimensionMismatch {
                expected: basis.dim(Modes::Pair),
                found: spectrum.eigenvalues().len(),
            });
        }
        if bath.modes() != Modes::Single || bath.basis() != basis {
            return Err(OttoError::DimensionMismatch { expected: basis.n_levels(), found: bath.dim() });
        }
        if spectrum.unitarity_bound() > UNITARITY_TOL {
            return Err(OttoError::UnitarityDefect {
                defect: spectrum.unitarity_bound(),
                limit: UNITARITY_TOL,
                steps: 1,
                dtau: 0.0,
                divisor: 1.0,
            });
        }
        let n = basis.n_levels();
        let dim = n * n;
        let evd = HermitianEigen::new(bath.matrix())?;
        let heaviest = evd.values.iter().cloned().fold(0.0, f64::max);
        let kept: Vec<usize> = (0..n).filter(|&k| evd.values[k] > POPULATION_CUTOFF * heaviest).collect();
        let weights: Vec<f64> = kept.iter().map(|&k| evd.values[k]).collect();
        let phi = Mat::from_fn(n, kept.len(), |j, k| evd.vectors[(j, kept[k])]);

        let v = spectrum.eigenvectors();
        let kk = kept.len();
        let mut projected = Mat::<C64>::zeros(dim, n * kk);
        for c in 0..n {
            // rows (c, .) of V, adjointed, times Phi
            let rows = v.subrows(c * n, n);
            matmul(
                projected.as_mut().subcols_mut(c * kk, kk),
                Accum::Replace,
                rows.adjoint(),
                phi.as_ref(),
                ONE,
                Par::Seq,
            );
        }
        Ok(Self { spectrum, weights, projected })
    }

    /// Channel for a contact lasting `duration`.
    pub fn channel(&self, duration: f64) -> ContactChannel {
        let basis = self.spectrum.basis();
        let n = basis.n_levels();
        let kk = self.weights.len();
        let dim = n * n;
        let values = self.spectrum.eigenvalues();
        let mut phased = self.projected.clone();
        for r in 0..dim {
            let p = phase(values[r], duration);
            for col in 0..n * kk {
                phased[(r, col)] *= p;
            }
        }
        // W[(a,m),(c,k)] = U (1 (x) Phi)
        let w = linalg::mul(self.spectrum.eigenvectors(), phased.as_ref());
        // A[(a,c),(m,k)] = sqrt(p_k) W[(a,m),(c,k)]
        let roots: Vec<f64> = self.weights.iter().map(|p| p.sqrt()).collect();
        let a = Mat::from_fn(dim, n * kk, |row, col| {
            let (ga, gc) = (row / n, row % n);
            let (m, k) = (col / kk, col % kk);
            w[(ga * n + m, gc * kk + k)] * roots[k]
        });
        let mut choi = Mat::<C64>::zeros(dim, dim);
        matmul(choi.as_mut(), Accum::Replace, a.as_ref(), a.adjoint(), ONE, Par::Seq);
        ContactChannel { choi, basis, duration, unitarity_bound: self.spectrum.unitarity_bound() }
    }
}

impl ContactChannel {
    /// One contact of length `duration` under the Hamiltonian behind `spectrum`.
    pub fn new(spectrum: &Spectrum, bath: &DensityOperator, duration: f64) -> Result<Self> {
        Ok(ContactKernel::new(spectrum, bath)?.channel(duration))
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn basis(&self) -> FockBasis {
        self.basis
    }

    /// Bound on `max |U^dagger U - 1|` of the underlying two-mode propagator.
    pub fn unitarity_bound(&self) -> f64 {
        self.unitarity_bound
    }

    /// `max |tr_out C - 1|`: how far the map is from trace preserving.
    pub fn trace_defect(&self) -> f64 {
        let n = self.basis.n_levels();
        let mut worst = 0.0f64;
        for c in 0..n {
            for d in 0..n {
                let mut s = ZERO;
                for a in 0..n {
                    s += self.choi[(a * n + c, a * n + d)];
                }
                let want = if c == d { ONE } else { ZERO };
                worst = worst.max((s - want).norm());
            }
        }
        worst
    }

    /// The reduced gas state after the contact. The result is not re-validated.
    pub fn apply(&self, gas: &DensityOperator) -> Result<DensityOperator> {
        if gas.modes() != Modes::Single || gas.basis() != self.basis {
            return Err(OttoError::DimensionMismatch { expected: self.basis.n_levels(), found: gas.dim() });
        }
        let n = self.basis.n_levels();
        let rho = gas.matrix();
        let mut out = Mat::<C64>::zeros(n, n);
        for b in 0..n {
            for d in 0..n {
                for c in 0..n {
                    let r = rho[(c, d)];
                    if r == ZERO {
                        continue;
                    }
                    let col = self.choi.col(b * n + d);
                    for a in 0..n {
                        out[(a, b)] += col[a * n + c] * r;
                    }
                }
            }
        }
        Ok(DensityOperator::trusted(linalg::hermitize(out), self.basis, Modes::Single))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{partial_trace_bath, thermal_state, trace_distance, Temperature};
    use crate::hamiltonian::{coupled_hamiltonian, gas_hamiltonian, CouplingSpec};
    use crate::propagator::exact_propagator;

    fn literal(n: usize, alpha: f64, t_gas: f64, t_bath: f64, duration: f64) -> (DensityOperator, DensityOperator) {
        let basis = FockBasis::new(n).unwrap();
        let coupling = CouplingSpec::new(1.0, 1.0, 1.0).unwrap();
        let h = coupled_hamiltonian(basis, alpha, &coupling).unwrap();
        let single = gas_hamiltonian(basis, alpha);
        let gas = thermal_state(&gas_hamiltonian(basis, 0.0), Temperature::new(t_gas).unwrap()).unwrap();
        let bath = thermal_state(&single, Temperature::new(t_bath).unwrap()).unwrap();

        let u = exact_propagator(&h, duration).unwrap();
        let total = DensityOperator::product(&gas, &bath).unwrap();
        let want = partial_trace_bath(&u.evolve(&total).unwrap()).unwrap();

        let spectrum = Spectrum::new(&h).unwrap();
        let got = ContactChannel::new(&spectrum, &bath, duration).unwrap().apply(&gas).unwrap();
        (want, got)
    }

    #[test]
    fn matches_tensor_conjugate_trace_route() {
        for (n, alpha, tg, tb, dur) in [(4, 0.0, 1.0, 5.0, 3.0), (6, 8.0, 0.1, 5.0, 10.0), (5, 3.0, 5.0, 0.1, 1.7)] {
            let (want, got) = literal(n, alpha, tg, tb, dur);
            let d = trace_distance(&want, &got).unwrap();
            assert!(d < 1e-12, "n = {n}: {d}");
        }
    }

    #[test]
    fn zero_duration_leaves_gas_untouched() {
        let (want, got) = literal(5, 3.0, 1.0, 5.0, 0.0);
        assert!(trace_distance(&want, &got).unwrap() < 1e-13);
    }

    #[test]
    fn kernel_durations_share_decomposition() {
        let basis = FockBasis::new(5).unwrap();
        let coupling = CouplingSpec::new(0.2, 1.0, 1.0).unwrap();
        let h = coupled_hamiltonian(basis, 0.0, &coupling).unwrap();
        let bath = thermal_state(&gas_hamiltonian(basis, 0.0), Temperature::new(1.0).unwrap()).unwrap();
        let gas = DensityOperator::fock_state(basis, 3).unwrap();
        let spectrum = Spectrum::new(&h).unwrap();
        let kernel = ContactKernel::new(&spectrum, &bath).unwrap();
        for dur in [5.0, 10.0, 25.0] {
            let shared = kernel.channel(dur);
            assert!(shared.trace_defect() < 1e-12);
            let fresh = ContactChannel::new(&spectrum, &bath, dur).unwrap();
            let d = trace_distance(&shared.apply(&gas).unwrap(), &fresh.apply(&gas).unwrap()).unwrap();
            assert!(d < 1e-14);
        }
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let basis = FockBasis::new(3).unwrap();
        let coupling = CouplingSpec::new(1.0, 1.0, 1.0).unwrap();
        let spectrum = Spectrum::new(&coupled_hamiltonian(basis, 0.0, &coupling).unwrap()).unwrap();
        let wrong = DensityOperator::fock_state(FockBasis::new(4).unwrap(), 0).unwrap();
        assert!(ContactChannel::new(&spectrum, &wrong, 1.0).is_err());
        let single = Spectrum::new(&gas_hamiltonian(basis, 0.0)).unwrap();
        let bath = DensityOperator::fock_state(basis, 0).unwrap();
        assert!(ContactChannel::new(&single, &bath, 1.0).is_err());
    }
}
