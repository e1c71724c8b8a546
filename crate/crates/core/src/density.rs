//! Density operators, thermal states and the metrics evaluated on them.

use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, OttoError, Result};
use crate::fock::{composite_index, kron, FockBasis, Modes, Operator};
use crate::linalg::{self, real, HermitianEigen, C64, ZERO};

/// Dimensionless temperature `k_B T / (hbar Omega)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Temperature(f64);

impl Temperature {
    pub fn new(omega_t: f64) -> Result<Self> {
        if !(omega_t.is_finite() && omega_t > 0.0) {
            return Err(invalid("omega_T", format!("temperature must be positive and finite, got {omega_t}")));
        }
        Ok(Self(omega_t))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Temperature {
    type Error = OttoError;

    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Temperature> for f64 {
    fn from(t: Temperature) -> f64 {
        t.0
    }
}

/// Acceptance thresholds for a matrix to count as a density operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateTolerance {
    pub hermiticity: f64,
    pub trace: f64,
    /// Most negative eigenvalue tolerated. Nothing is clipped.
    pub negativity: f64,
}

impl Default for StateTolerance {
    fn default() -> Self {
        Self { hermiticity: 1e-12, trace: 1e-10, negativity: 1e-10 }
    }
}

/// Hermitian, unit-trace, positive semidefinite state on one or two modes.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    matrix: Mat<C64>,
    basis: FockBasis,
    modes: Modes,
}

impl DensityOperator {
    /// Validates against [`StateTolerance::default`].
    pub fn new(matrix: Mat<C64>, basis: FockBasis, modes: Modes) -> Result<Self> {
        Self::with_tolerance(matrix, basis, modes, &StateTolerance::default())
    }

    pub fn with_tolerance(matrix: Mat<C64>, basis: FockBasis, modes: Modes, tol: &StateTolerance) -> Result<Self> {
        let dim = basis.dim(modes);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(OttoError::DimensionMismatch { expected: dim, found: matrix.nrows() });
        }
        let state = Self { matrix, basis, modes };
        state.validate(tol)?;
        Ok(state)
    }

    /// For results that are states by construction (products, reductions).
    pub(crate) fn trusted(matrix: Mat<C64>, basis: FockBasis, modes: Modes) -> Self {
        debug_assert_eq!(matrix.nrows(), basis.dim(modes));
        Self { matrix, basis, modes }
    }

    /// Pure state `|n><n|` on one mode.
    pub fn fock_state(basis: FockBasis, n: usize) -> Result<Self> {
        if n >= basis.n_levels() {
            return Err(invalid("n", format!("level {n} outside a {}-level basis", basis.n_levels())));
        }
        let d = basis.n_levels();
        let matrix = Mat::from_fn(d, d, |i, j| if i == n && j == n { real(1.0) } else { ZERO });
        Ok(Self { matrix, basis, modes: Modes::Single })
    }

    pub fn validate(&self, tol: &StateTolerance) -> Result<()> {
        let herm = linalg::hermiticity_defect(self.matrix.as_ref());
        if herm > tol.hermiticity {
            return Err(OttoError::NotHermitian { deviation: herm });
        }
        let tr = linalg::trace(self.matrix.as_ref()).re;
        if (tr - 1.0).abs() > tol.trace {
            return Err(OttoError::TraceNotUnity { trace: tr });
        }
        let min = self.min_eigenvalue()?;
        if min < -tol.negativity {
            return Err(OttoError::NotPositive { eigenvalue: min });
        }
        Ok(())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let vals = linalg::hermitian_eigenvalues(self.matrix.as_ref())?;
        Ok(vals.first().copied().unwrap_or(0.0))
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(self.matrix.as_ref()).re
    }

    pub fn into_matrix(self) -> Mat<C64> {
        self.matrix
    }

    /// `rho_gas (x) rho_bath`.
    pub fn product(gas: &Self, bath: &Self) -> Result<Self> {
        if gas.modes != Modes::Single || bath.modes != Modes::Single {
            return Err(invalid("modes", "product states are formed from single-mode states"));
        }
        if gas.basis != bath.basis {
            return Err(OttoError::DimensionMismatch { expected: gas.basis.n_levels(), found: bath.basis.n_levels() });
        }
        Ok(Self::trusted(kron(gas.matrix.as_ref(), bath.matrix.as_ref()), gas.basis, Modes::Pair))
    }

    /// `u rho u^dagger`. The result is not re-validated.
    pub fn conjugated(&self, u: MatRef<'_, C64>) -> Result<Self> {
        self.check_dim(u.nrows())?;
        Ok(Self::trusted(linalg::conjugate(u, self.matrix.as_ref()), self.basis, self.modes))
    }

    /// `u^dagger rho u`. The result is not re-validated.
    pub fn conjugated_adjoint(&self, u: MatRef<'_, C64>) -> Result<Self> {
        self.check_dim(u.nrows())?;
        Ok(Self::trusted(linalg::conjugate_adjoint(u, self.matrix.as_ref()), self.basis, self.modes))
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        let expected = self.dim();
        if found != expected {
            return Err(OttoError::DimensionMismatch { expected, found });
        }
        Ok(())
    }
}

impl Operator for DensityOperator {
    fn matrix(&self) -> MatRef<'_, C64> {
        self.matrix.as_ref()
    }
    fn basis(&self) -> FockBasis {
        self.basis
    }
    fn modes(&self) -> Modes {
        self.modes
    }
}

fn check_hermitian(h: &impl Operator) -> Result<()> {
    let deviation = linalg::hermiticity_defect(h.matrix());
    if deviation > 1e-12 {
        return Err(OttoError::NotHermitian { deviation });
    }
    Ok(())
}

/// `exp(-H / omega_T) / tr[...]`, built from the eigendecomposition of `H`.
pub fn thermal_state(h: &impl Operator, temperature: Temperature) -> Result<DensityOperator> {
    check_hermitian(h)?;
    let evd = HermitianEigen::new(h.matrix())?;
    Ok(thermal_from_eigen(&evd, temperature, h.basis(), h.modes()))
}

/// Thermal state from a precomputed eigendecomposition; lets temperature
/// scans reuse one diagonalization.
pub fn thermal_from_eigen(
    evd: &HermitianEigen,
    temperature: Temperature,
    basis: FockBasis,
    modes: Modes,
) -> DensityOperator {
    let ground = evd.values[0];
    let t = temperature.value();
    // shifted by the ground energy so the largest weight is exactly 1
    let boltzmann = |e: f64| (-(e - ground) / t).exp();
    let z: f64 = evd.values.iter().map(|&e| boltzmann(e)).sum();
    let matrix = evd.apply_fn(|e| real(boltzmann(e) / z));
    DensityOperator::trusted(linalg::hermitize(matrix), basis, modes)
}

/// Projector onto the lowest eigenvector of `H`; the zero-temperature limit
/// of [`thermal_state`].
pub fn ground_state(h: &impl Operator) -> Result<DensityOperator> {
    check_hermitian(h)?;
    let evd = HermitianEigen::new(h.matrix())?;
    let v = evd.vectors.col(0);
    let n = v.nrows();
    let matrix = Mat::from_fn(n, n, |i, j| v[i] * v[j].conj());
    Ok(DensityOperator::trusted(linalg::hermitize(matrix), h.basis(), h.modes()))
}

/// `tr_bath` of a gas-first two-mode state.
pub fn partial_trace_bath(rho_total: &DensityOperator) -> Result<DensityOperator> {
    if rho_total.modes != Modes::Pair {
        return Err(invalid("rho_total", "partial trace needs a two-mode state"));
    }
    let m = reduce_gas(rho_total.matrix(), rho_total.basis)?;
    Ok(DensityOperator::trusted(m, rho_total.basis, Modes::Single))
}

/// Matrix-level partial trace over the bath factor.
pub fn reduce_gas(m: MatRef<'_, C64>, basis: FockBasis) -> Result<Mat<C64>> {
    let n = basis.n_levels();
    if m.nrows() != n * n || m.ncols() != n * n {
        return Err(OttoError::DimensionMismatch { expected: n * n, found: m.nrows() });
    }
    Ok(Mat::from_fn(n, n, |g, h| (0..n).map(|b| m[(composite_index(basis, g, b), composite_index(basis, h, b))]).sum()))
}

/// `(1/2) sum |lambda_i|` over the eigenvalues of `rho - sigma`.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(OttoError::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    let diff = linalg::hermitize(&rho.matrix - &sigma.matrix);
    let vals = linalg::hermitian_eigenvalues(diff.as_ref())?;
    Ok(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>())
}

/// Imaginary part of `tr[H rho]` above which the state is considered corrupt.
pub const ENERGY_IMAG_TOL: f64 = 1e-8;

/// `Re tr[H rho]`.
pub fn energy(rho: &DensityOperator, h: &impl Operator) -> Result<f64> {
    if rho.dim() != h.dim() {
        return Err(OttoError::DimensionMismatch { expected: rho.dim(), found: h.dim() });
    }
    let hm = h.matrix();
    let n = rho.dim();
    let mut acc = ZERO;
    for j in 0..n {
        for i in 0..n {
            acc += hm[(i, j)] * rho.matrix[(j, i)];
        }
    }
    if acc.im.abs() > ENERGY_IMAG_TOL {
        return Err(OttoError::ComplexEnergy { imaginary: acc.im });
    }
    Ok(acc.re)
}
