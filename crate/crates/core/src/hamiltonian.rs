//! Gas-mode Hamiltonian, Gaussian gas-bath coupling and the two-mode contact
//! Hamiltonian, all in units of the uncompressed oscillator quantum.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, OttoError, Result};
use crate::fock::{kron, oscillator_wavefunctions, CompositeOperator, FockBasis, ModeOperator, Operator};
use crate::linalg::{real, ZERO};
use crate::quadrature::GaussLegendre;

/// Stiffness reached at frequency ratio `omega`: `omega^2 - 1`.
pub fn alpha_max(omega: f64) -> f64 {
    omega * omega - 1.0
}

/// Linear ramp of the stiffness parameter over one stroke.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StiffnessSchedule {
    pub alpha_start: f64,
    pub alpha_end: f64,
    pub tau_alpha: f64,
}

impl StiffnessSchedule {
    pub fn new(alpha_start: f64, alpha_end: f64, tau_alpha: f64) -> Result<Self> {
        for (name, a) in [("alpha_start", alpha_start), ("alpha_end", alpha_end)] {
            if !(a.is_finite() && a >= 0.0) {
                return Err(invalid(name, format!("stiffness must be finite and non-negative, got {a}")));
            }
        }
        if !(tau_alpha.is_finite() && tau_alpha > 0.0) {
            return Err(invalid("tau_alpha", format!("stroke duration must be positive, got {tau_alpha}")));
        }
        Ok(Self { alpha_start, alpha_end, tau_alpha })
    }

    /// Ramp from rest (`alpha = 0`) to `omega^2 - 1`.
    pub fn compression(omega: f64, tau_alpha: f64) -> Result<Self> {
        Self::new(0.0, alpha_max(omega), tau_alpha)
    }

    pub fn expansion(omega: f64, tau_alpha: f64) -> Result<Self> {
        Self::new(alpha_max(omega), 0.0, tau_alpha)
    }

    pub fn constant(alpha: f64, tau_alpha: f64) -> Result<Self> {
        Self::new(alpha, alpha, tau_alpha)
    }

    pub fn alpha_at(&self, tau: f64) -> f64 {
        self.alpha_start + (self.alpha_end - self.alpha_start) * (tau / self.tau_alpha)
    }

    pub fn is_constant(&self) -> bool {
        self.alpha_start == self.alpha_end
    }

    pub fn peak_alpha(&self) -> f64 {
        self.alpha_start.max(self.alpha_end)
    }
}

/// Gaussian central potential `phi0 exp(-|r - r0|^2 / 2 sigma^2)` centered on
/// the diagonal `x_g0 = x_b0 = x0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    pub phi0: f64,
    pub sigma: f64,
    pub x0: f64,
}

impl CouplingSpec {
    pub fn new(phi0: f64, sigma: f64, x0: f64) -> Result<Self> {
        if !phi0.is_finite() {
            return Err(invalid("phi0", "coupling strength must be finite"));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(invalid("sigma", format!("width must be positive, got {sigma}")));
        }
        if !(x0.is_finite() && x0 >= 0.0) {
            return Err(invalid("x0", format!("offset must be non-negative, got {x0}")));
        }
        Ok(Self { phi0, sigma, x0 })
    }

    /// Re-runs the checks of [`CouplingSpec::new`] on deserialized fields.
    pub fn validate(&self) -> Result<()> {
        Self::new(self.phi0, self.sigma, self.x0).map(|_| ())
    }

    pub fn with_strength(self, phi0: f64) -> Self {
        Self { phi0, ..self }
    }
}

/// Diagonal and `n <-> n+2` band of the gas Hamiltonian, split into the part
/// independent of the stiffness and the part proportional to it:
/// `H(alpha) = base + alpha * slope`.
#[derive(Clone, Debug)]
pub(crate) struct GasBands {
    pub base_diag: Vec<f64>,
    pub slope_diag: Vec<f64>,
    /// `<n+2| H |n> / alpha`, indexed by `n`.
    pub slope_offdiag: Vec<f64>,
}

impl GasBands {
    pub fn new(basis: FockBasis) -> Self {
        let n = basis.n_levels();
        let base_diag = (0..n).map(|k| k as f64 + 0.5).collect::<Vec<_>>();
        let slope_diag = base_diag.iter().map(|d| d / 2.0).collect();
        let slope_offdiag =
            (0..n.saturating_sub(2)).map(|k| ((k as f64 + 1.0) * (k as f64 + 2.0)).sqrt() / 4.0).collect();
        Self { base_diag, slope_diag, slope_offdiag }
    }
}

/// `(a^dagger a + 1/2)(1 + alpha/2) + (alpha/4)(a^dagger a^dagger + a a)`.
pub fn gas_hamiltonian(basis: FockBasis, alpha: f64) -> ModeOperator {
    assert!(alpha.is_finite() && alpha >= 0.0, "stiffness must be non-negative, got {alpha}");
    let bands = GasBands::new(basis);
    let n = basis.n_levels();
    let m = Mat::from_fn(n, n, |i, j| {
        if i == j {
            real(bands.base_diag[i] + alpha * bands.slope_diag[i])
        } else if i == j + 2 {
            real(alpha * bands.slope_offdiag[j])
        } else if j == i + 2 {
            real(alpha * bands.slope_offdiag[i])
        } else {
            ZERO
        }
    });
    ModeOperator::from_matrix(m, basis).expect("dimension fixed by basis")
}

/// Largest per-element change tolerated between successive node doublings.
pub const QUADRATURE_TOL: f64 = 1e-10;
const MAX_DOUBLINGS: usize = 8;

/// Single-mode factor `<j| exp(-(x - x0)^2 / 2 sigma^2) |k>` of the coupling,
/// without the strength `phi0`.
pub fn gaussian_coupling_matrix(basis: FockBasis, coupling: &CouplingSpec) -> Result<ModeOperator> {
    let n = basis.n_levels();
    let half_width = coupling.x0 + 6.0 * coupling.sigma.max((2.0 * n as f64 + 1.0).sqrt());
    let mut nodes = 8 * n;
    let mut current = gaussian_elements(n, coupling, half_width, nodes);
    let mut change = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        nodes *= 2;
        let refined = gaussian_elements(n, coupling, half_width, nodes);
        change = current.iter().zip(&refined).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        current = refined;
        if change <= QUADRATURE_TOL {
            let m = Mat::from_fn(n, n, |i, j| real(current[i * n + j]));
            return ModeOperator::from_matrix(m, basis);
        }
    }
    Err(OttoError::QuadratureNotConverged { nodes, change })
}

fn gaussian_elements(n: usize, coupling: &CouplingSpec, half_width: f64, nodes: usize) -> Vec<f64> {
    let rule = GaussLegendre::new(nodes, -half_width, half_width);
    let two_s2 = 2.0 * coupling.sigma * coupling.sigma;
    let mut out = vec![0.0; n * n];
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let g = w * (-(x - coupling.x0).powi(2) / two_s2).exp();
        if g == 0.0 {
            continue;
        }
        let psi = oscillator_wavefunctions(n, x);
        for j in 0..n {
            let gj = g * psi[j];
            for k in j..n {
                out[j * n + k] += gj * psi[k];
            }
        }
    }
    for j in 0..n {
        for k in 0..j {
            out[j * n + k] = out[k * n + j];
        }
    }
    if coupling.x0 == 0.0 {
        // even weight: mixed-parity elements vanish identically
        for j in 0..n {
            for k in 0..n {
                if (j + k) % 2 == 1 {
                    out[j * n + k] = 0.0;
                }
            }
        }
    }
    out
}

/// `phi0 * single (x) single`.
pub fn interaction_matrix(single: &ModeOperator, phi0: f64) -> CompositeOperator {
    let m = kron(single.matrix(), single.matrix()) * faer::Scale(real(phi0));
    CompositeOperator::from_matrix(m, single.basis()).expect("dimension fixed by basis")
}

/// Gas and bath at a common stiffness plus the Gaussian interaction.
pub fn coupled_hamiltonian(basis: FockBasis, alpha: f64, coupling: &CouplingSpec) -> Result<CompositeOperator> {
    let single = gaussian_coupling_matrix(basis, coupling)?;
    Ok(coupled_hamiltonian_with(basis, alpha, coupling.phi0, &single))
}

/// [`coupled_hamiltonian`] with a precomputed single-mode coupling factor.
pub fn coupled_hamiltonian_with(basis: FockBasis, alpha: f64, phi0: f64, single: &ModeOperator) -> CompositeOperator {
    let h = gas_hamiltonian(basis, alpha);
    let n = basis.n_levels();
    let mut m = kron(single.matrix(), single.matrix()) * faer::Scale(real(phi0));
    let hm = h.matrix();
    for g in 0..n {
        for b in 0..n {
            let row = g * n + b;
            // H (x) 1: <g b| H (x) 1 |g' b> = H[g, g']
            for gp in 0..n {
                let v = hm[(g, gp)];
                if v != ZERO {
                    m[(row, gp * n + b)] += v;
                }
            }
            // 1 (x) H
            for bp in 0..n {
                let v = hm[(b, bp)];
                if v != ZERO {
                    m[(row, g * n + bp)] += v;
                }
            }
        }
    }
    CompositeOperator::from_matrix(m, basis).expect("dimension fixed by basis")
}
