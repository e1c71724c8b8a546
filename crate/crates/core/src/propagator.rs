//! Time-evolution operators `U(tau)` solving `dU/dtau = -2 pi i H(tau) U`.
//!
//! Time-independent Hamiltonians are exponentiated exactly through their
//! eigendecomposition. Ramped strokes of the gas mode are integrated with a
//! fixed-step fifth-order Runge-Kutta scheme on the full propagator matrix.

use std::f64::consts::PI;

use faer::{Mat, MatRef};

use crate::density::DensityOperator;
use crate::error::{invalid, OttoError, Result};
use crate::fock::{FockBasis, Modes, Operator};
use crate::hamiltonian::{gas_hamiltonian, GasBands, StiffnessSchedule};
use crate::linalg::{self, HermitianEigen, C64};

/// Unitarity defect `max |U^dagger U - 1|` every propagator is held to.
pub const UNITARITY_TOL: f64 = 1e-8;

/// Defect at which Runge-Kutta integration is abandoned as under-resolved.
pub const UNITARITY_ABORT: f64 = 1e-6;

/// A unitary (within [`UNITARITY_TOL`]) evolution over `duration`.
#[derive(Clone, Debug)]
pub struct Propagator {
    matrix: Mat<C64>,
    duration: f64,
    basis: FockBasis,
    modes: Modes,
    defect: f64,
}

impl Propagator {
    fn measured(matrix: Mat<C64>, duration: f64, basis: FockBasis, modes: Modes) -> Self {
        let defect = linalg::unitarity_defect(matrix.as_ref());
        Self { matrix, duration, basis, modes, defect }
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// `max |U^dagger U - 1|`, measured at construction.
    pub fn unitarity_defect(&self) -> f64 {
        self.defect
    }

    pub fn is_unitary(&self) -> bool {
        self.defect <= UNITARITY_TOL
    }

    /// `U rho U^dagger`.
    pub fn evolve(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        rho.conjugated(self.matrix.as_ref())
    }

    /// `U^dagger rho U`, the stroke run backwards.
    pub fn evolve_reversed(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        rho.conjugated_adjoint(self.matrix.as_ref())
    }

    /// `self` after `earlier`: `U_self U_earlier`.
    pub fn after(&self, earlier: &Propagator) -> Result<Propagator> {
        if self.dim() != earlier.dim() {
            return Err(OttoError::DimensionMismatch { expected: self.dim(), found: earlier.dim() });
        }
        let m = linalg::mul(self.matrix.as_ref(), earlier.matrix.as_ref());
        Ok(Self::measured(m, self.duration + earlier.duration, self.basis, self.modes))
    }

    pub fn adjoint(&self) -> Propagator {
        Self { matrix: self.matrix.adjoint().to_owned(), ..self.clone() }
    }

    pub fn into_matrix(self) -> Mat<C64> {
        self.matrix
    }
}

impl Operator for Propagator {
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

/// Step-size rule `dtau = eps / divisor`, `eps = [2 pi n_max (1 + alpha_max/2)]^-1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRule {
    pub n_max: usize,
    pub alpha_max: f64,
    pub divisor: f64,
}

/// Divisor used for production runs.
pub const DEFAULT_DIVISOR: f64 = 5.0;

impl StepRule {
    pub fn new(n_max: usize, alpha_max: f64, divisor: f64) -> Result<Self> {
        if n_max == 0 {
            return Err(invalid("n_max", "must be positive"));
        }
        if !(alpha_max.is_finite() && alpha_max >= 0.0) {
            return Err(invalid("alpha_max", format!("must be non-negative, got {alpha_max}")));
        }
        if !(divisor.is_finite() && divisor > 0.0) {
            return Err(invalid("divisor", format!("must be positive, got {divisor}")));
        }
        Ok(Self { n_max, alpha_max, divisor })
    }

    /// Rule for a schedule on `basis`, with `n_max` taken as the level count.
    pub fn for_schedule(basis: FockBasis, schedule: &StiffnessSchedule, divisor: f64) -> Result<Self> {
        Self::new(basis.n_levels(), schedule.peak_alpha(), divisor)
    }

    pub fn epsilon(&self) -> f64 {
        1.0 / (2.0 * PI * self.n_max as f64 * (1.0 + self.alpha_max / 2.0))
    }
}

pub fn step_size(rule: &StepRule) -> f64 {
    rule.epsilon() / rule.divisor
}

fn check_hermitian(h: &impl Operator) -> Result<()> {
    let deviation = linalg::hermiticity_defect(h.matrix());
    if deviation > 1e-12 {
        return Err(OttoError::NotHermitian { deviation });
    }
    Ok(())
}

/// `exp(-2 pi i H dtau)`.
pub fn exact_propagator(h: &impl Operator, dtau: f64) -> Result<Propagator> {
    Spectrum::new(h)?.propagator(dtau)
}

/// Eigendecomposition of a time-independent Hamiltonian, kept around so that
/// propagators for several durations share one diagonalization.
#[derive(Clone, Debug)]
pub struct Spectrum {
    eigen: HermitianEigen,
    basis: FockBasis,
    modes: Modes,
    /// `max |V^dagger V - 1|` of the eigenvector matrix.
    orthonormality_defect: f64,
}

impl Spectrum {
    pub fn new(h: &impl Operator) -> Result<Self> {
        check_hermitian(h)?;
        let eigen = HermitianEigen::new(h.matrix())?;
        let orthonormality_defect = linalg::unitarity_defect(eigen.vectors.as_ref());
        Ok(Self { eigen, basis: h.basis(), modes: h.modes(), orthonormality_defect })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen.values
    }

    pub fn eigenvectors(&self) -> MatRef<'_, C64> {
        self.eigen.vectors.as_ref()
    }

    pub fn basis(&self) -> FockBasis {
        self.basis
    }

    pub fn modes(&self) -> Modes {
        self.modes
    }

    /// Upper bound on the unitarity defect of anything built as
    /// `V diag(phases) V^dagger` from this decomposition.
    pub fn unitarity_bound(&self) -> f64 {
        2.0 * self.orthonormality_defect
    }

    /// `exp(-2 pi i H dtau)`, with its unitarity defect measured directly.
    pub fn propagator(&self, dtau: f64) -> Result<Propagator> {
        let m = self.eigen.apply_fn(|e| phase(e, dtau));
        let p = Propagator::measured(m, dtau, self.basis, self.modes);
        if p.defect > UNITARITY_TOL {
            return Err(OttoError::UnitarityDefect {
                defect: p.defect,
                limit: UNITARITY_TOL,
                steps: 1,
                dtau,
                divisor: 1.0,
            });
        }
        Ok(p)
    }
}

/// `exp(-2 pi i e dtau)`.
pub(crate) fn phase(e: f64, dtau: f64) -> C64 {
    let theta = -2.0 * PI * e * dtau;
    C64::new(theta.cos(), theta.sin())
}

/// Time-ordered propagator of the gas mode over a stiffness ramp.
pub fn rk5_propagator(schedule: &StiffnessSchedule, basis: FockBasis, step: &StepRule) -> Result<Propagator> {
    let p = integrate_gas(schedule, basis, step)?;
    if p.defect > UNITARITY_ABORT {
        let dtau = schedule.tau_alpha / steps_for(schedule.tau_alpha, step_size(step)) as f64;
        return Err(OttoError::UnitarityDefect {
            defect: p.defect,
            limit: UNITARITY_ABORT,
            steps: steps_for(schedule.tau_alpha, step_size(step)),
            dtau,
            divisor: step.divisor,
        });
    }
    Ok(p)
}

/// Propagator of a gas stroke: exact for a constant stiffness, otherwise
/// [`rk5_unitary_propagator`]. Returns the step rule actually used.
pub fn stroke_propagator(
    schedule: &StiffnessSchedule,
    basis: FockBasis,
    step: &StepRule,
) -> Result<(Propagator, StepRule)> {
    if schedule.is_constant() {
        let h = gas_hamiltonian(basis, schedule.alpha_start);
        return Ok((exact_propagator(&h, schedule.tau_alpha)?, *step));
    }
    rk5_unitary_propagator(schedule, basis, step)
}

/// Most refinements [`rk5_unitary_propagator`] attempts before giving up.
pub const MAX_REFINEMENTS: usize = 6;

/// [`rk5_propagator`] with the step shrunk until the unitarity defect is within
/// [`UNITARITY_TOL`]. The defect of the fixed-step scheme scales as
/// `divisor^-5`, which sets the next divisor to try. Returns the rule that
/// succeeded.
pub fn rk5_unitary_propagator(
    schedule: &StiffnessSchedule,
    basis: FockBasis,
    step: &StepRule,
) -> Result<(Propagator, StepRule)> {
    let mut rule = *step;
    for _ in 0..=MAX_REFINEMENTS {
        let p = integrate_gas(schedule, basis, &rule)?;
        if p.defect <= UNITARITY_TOL {
            return Ok((p, rule));
        }
        let growth = (2.0 * p.defect / UNITARITY_TOL).powf(0.2).clamp(1.5, 8.0);
        rule.divisor = (rule.divisor * growth).ceil();
    }
    let p = integrate_gas(schedule, basis, &rule)?;
    let steps = steps_for(schedule.tau_alpha, step_size(&rule));
    Err(OttoError::UnitarityDefect {
        defect: p.defect,
        limit: UNITARITY_TOL,
        steps,
        dtau: schedule.tau_alpha / steps as f64,
        divisor: rule.divisor,
    })
}

/// Like [`rk5_propagator`] but never aborts; the defect is left for the caller
/// to inspect. Used by convergence studies that deliberately run coarse steps.
pub fn integrate_gas(schedule: &StiffnessSchedule, basis: FockBasis, step: &StepRule) -> Result<Propagator> {
    let dtau_max = step_size(step);
    let steps = steps_for(schedule.tau_alpha, dtau_max);
    let dtau = schedule.tau_alpha / steps as f64;
    let bands = GasBands::new(basis);
    let n = basis.n_levels();
    let mut full = Mat::<C64>::zeros(n, n);
    for parity in 0..2 {
        let block = ParityBlock::new(&bands, parity);
        let u = block.integrate(schedule, dtau, steps);
        let m = block.levels.len();
        for (c, &lc) in block.levels.iter().enumerate() {
            for (r, &lr) in block.levels.iter().enumerate() {
                full[(lr, lc)] = C64::new(u[c * m + r], u[m * m + c * m + r]);
            }
        }
    }
    Ok(Propagator::measured(full, schedule.tau_alpha, basis, Modes::Single))
}

/// Steps of at most `dtau_max` covering `duration` exactly.
pub fn steps_for(duration: f64, dtau_max: f64) -> usize {
    let ratio = duration / dtau_max;
    // ratios within rounding of an integer do not earn an extra step
    let steps = (ratio - 1e-9 * ratio.max(1.0)).ceil();
    (steps as usize).max(1)
}

// Dormand-Prince coefficients of the fifth-order solution.
const C: [f64; 6] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0];
const A: [[f64; 5]; 6] = [
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
];
const B: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];

/// The gas Hamiltonian only couples `n` to `n +- 2`, so it splits into an even
/// and an odd block, each tridiagonal in its own level index.
struct ParityBlock {
    levels: Vec<usize>,
    base_diag: Vec<f64>,
    slope_diag: Vec<f64>,
    /// Coupling between block rows `r` and `r + 1`, per unit stiffness.
    slope_off: Vec<f64>,
}

impl ParityBlock {
    fn new(bands: &GasBands, parity: usize) -> Self {
        let n = bands.base_diag.len();
        let levels: Vec<usize> = (parity..n).step_by(2).collect();
        let base_diag = levels.iter().map(|&l| bands.base_diag[l]).collect();
        let slope_diag = levels.iter().map(|&l| bands.slope_diag[l]).collect();
        let slope_off = levels.iter().take(levels.len().saturating_sub(1)).map(|&l| bands.slope_offdiag[l]).collect();
        Self { levels, base_diag, slope_diag, slope_off }
    }

    /// Integrates the block from the identity. The state is stored as a real
    /// `m x 2m` column-major array: real part, then imaginary part.
    fn integrate(&self, schedule: &StiffnessSchedule, dtau: f64, steps: usize) -> Vec<f64> {
        let m = self.levels.len();
        let len = 2 * m * m;
        let mut u = vec![0.0; len];
        for i in 0..m {
            u[i * m + i] = 1.0;
        }
        let mut k: [Vec<f64>; 6] = std::array::from_fn(|_| vec![0.0; len]);
        let mut stage = vec![0.0; len];
        let mut diag = vec![0.0; m];
        let mut off = vec![0.0; m.saturating_sub(1)];
        let two_pi = 2.0 * PI;
        for s in 0..steps {
            let t = s as f64 * dtau;
            for i in 0..6 {
                let coeffs: [f64; 5] = std::array::from_fn(|j| dtau * A[i][j]);
                combine(&mut stage, &u, &k[..i], &coeffs[..i]);
                let alpha = schedule.alpha_at(t + C[i] * dtau);
                for (d, (b, sl)) in diag.iter_mut().zip(self.base_diag.iter().zip(&self.slope_diag)) {
                    *d = two_pi * (b + alpha * sl);
                }
                for (o, sl) in off.iter_mut().zip(&self.slope_off) {
                    *o = two_pi * alpha * sl;
                }
                generator(&diag, &off, &stage, &mut k[i]);
            }
            let weights: [f64; 6] = std::array::from_fn(|j| dtau * B[j]);
            stage.copy_from_slice(&u);
            combine(&mut u, &stage, &k, &weights);
        }
        u
    }
}

/// `out = base + sum_j c_j k_j`, one pass over memory.
fn combine(out: &mut [f64], base: &[f64], k: &[Vec<f64>], c: &[f64]) {
    match k.len() {
        0 => out.copy_from_slice(base),
        1 => {
            for ((o, b), k0) in out.iter_mut().zip(base).zip(&k[0]) {
                *o = b + c[0] * k0;
            }
        }
        2 => {
            for (((o, b), k0), k1) in out.iter_mut().zip(base).zip(&k[0]).zip(&k[1]) {
                *o = b + c[0] * k0 + c[1] * k1;
            }
        }
        3 => {
            for ((((o, b), k0), k1), k2) in out.iter_mut().zip(base).zip(&k[0]).zip(&k[1]).zip(&k[2]) {
                *o = b + c[0] * k0 + c[1] * k1 + c[2] * k2;
            }
        }
        4 => {
            for (((((o, b), k0), k1), k2), k3) in out.iter_mut().zip(base).zip(&k[0]).zip(&k[1]).zip(&k[2]).zip(&k[3]) {
                *o = b + c[0] * k0 + c[1] * k1 + c[2] * k2 + c[3] * k3;
            }
        }
        5 => {
            for ((((((o, b), k0), k1), k2), k3), k4) in
                out.iter_mut().zip(base).zip(&k[0]).zip(&k[1]).zip(&k[2]).zip(&k[3]).zip(&k[4])
            {
                *o = b + c[0] * k0 + c[1] * k1 + c[2] * k2 + c[3] * k3 + c[4] * k4;
            }
        }
        _ => {
            // B[1] = 0, so the second stage drops out of the update
            for ((((((o, b), k0), k2), k3), k4), k5) in
                out.iter_mut().zip(base).zip(&k[0]).zip(&k[2]).zip(&k[3]).zip(&k[4]).zip(&k[5])
            {
                *o = b + c[0] * k0 + c[2] * k2 + c[3] * k3 + c[4] * k4 + c[5] * k5;
            }
        }
    }
}

/// `out = -i H y` for real tridiagonal `H` (already scaled by `2 pi`) and
/// `y = y_re + i y_im`.
fn generator(diag: &[f64], off: &[f64], y: &[f64], out: &mut [f64]) {
    let m = diag.len();
    let half = m * m;
    let (y_re, y_im) = y.split_at(half);
    let (out_re, out_im) = out.split_at_mut(half);
    // re(-i H y) = H y_im ; im(-i H y) = -H y_re
    for (x, o) in y_im.chunks_exact(m).zip(out_re.chunks_exact_mut(m)) {
        tridiag(diag, off, x, o, 1.0);
    }
    for (x, o) in y_re.chunks_exact(m).zip(out_im.chunks_exact_mut(m)) {
        tridiag(diag, off, x, o, -1.0);
    }
}

#[inline]
fn tridiag(diag: &[f64], off: &[f64], x: &[f64], out: &mut [f64], sign: f64) {
    let m = diag.len();
    for ((o, d), xi) in out.iter_mut().zip(diag).zip(x) {
        *o = sign * d * xi;
    }
    if m > 1 {
        for ((o, w), xi) in out[..m - 1].iter_mut().zip(off).zip(&x[1..]) {
            *o += sign * w * xi;
        }
        for ((o, w), xi) in out[1..].iter_mut().zip(off).zip(&x[..m - 1]) {
            *o += sign * w * xi;
        }
    }
}

/// Identity check used in tests and diagnostics.
pub fn distance_from_identity(u: &Propagator) -> f64 {
    let n = u.dim();
    let id = Mat::<C64>::identity(n, n);
    linalg::max_abs_diff(u.matrix(), id.as_ref())
}
