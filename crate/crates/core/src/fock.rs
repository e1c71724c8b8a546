//! Truncated Fock spaces and the operators living on them.
//!
//! Two-mode objects always use the gas-first ordering: the composite index of
//! `|g> (x) |b>` is `g * n_levels + b`, so the gas index varies slowest. Every
//! tensor product and partial trace in the crate goes through
//! [`composite_index`].

use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{OttoError, Result};
use crate::linalg::{self, real, C64, ZERO};

/// Number of retained levels of a single oscillator mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct FockBasis {
    n_levels: usize,
}

impl FockBasis {
    pub fn new(n_levels: usize) -> Result<Self> {
        if n_levels < 2 {
            return Err(OttoError::InvalidBasis(format!("n_levels must be at least 2, got {n_levels}")));
        }
        Ok(Self { n_levels })
    }

    pub fn n_levels(self) -> usize {
        self.n_levels
    }

    /// Dimension of a space with `modes` copies of this basis.
    pub fn dim(self, modes: Modes) -> usize {
        match modes {
            Modes::Single => self.n_levels,
            Modes::Pair => self.n_levels * self.n_levels,
        }
    }
}

impl TryFrom<usize> for FockBasis {
    type Error = OttoError;

    fn try_from(n: usize) -> Result<Self> {
        Self::new(n)
    }
}

impl From<FockBasis> for usize {
    fn from(b: FockBasis) -> usize {
        b.n_levels
    }
}

/// Composite index of `|gas> (x) |bath>`.
#[inline]
pub fn composite_index(basis: FockBasis, gas: usize, bath: usize) -> usize {
    gas * basis.n_levels + bath
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Modes {
    Single,
    Pair,
}

/// Any square matrix tagged with the Fock space it acts on.
pub trait Operator {
    fn matrix(&self) -> MatRef<'_, C64>;
    fn basis(&self) -> FockBasis;
    fn modes(&self) -> Modes;

    fn dim(&self) -> usize {
        self.basis().dim(self.modes())
    }
}

fn check_square(m: &Mat<C64>, dim: usize) -> Result<()> {
    if m.nrows() != dim {
        return Err(OttoError::DimensionMismatch { expected: dim, found: m.nrows() });
    }
    if m.ncols() != dim {
        return Err(OttoError::DimensionMismatch { expected: dim, found: m.ncols() });
    }
    Ok(())
}

macro_rules! operator_type {
    ($(#[$doc:meta])* $name:ident, $modes:expr) => {
        $(#[$doc])*
        #[derive(Clone, Debug)]
        pub struct $name {
            matrix: Mat<C64>,
            basis: FockBasis,
        }

        impl $name {
            pub fn from_matrix(matrix: Mat<C64>, basis: FockBasis) -> Result<Self> {
                check_square(&matrix, basis.dim($modes))?;
                Ok(Self { matrix, basis })
            }

            pub fn identity(basis: FockBasis) -> Self {
                let d = basis.dim($modes);
                Self { matrix: Mat::identity(d, d), basis }
            }

            pub fn zeros(basis: FockBasis) -> Self {
                let d = basis.dim($modes);
                Self { matrix: Mat::zeros(d, d), basis }
            }

            pub fn into_matrix(self) -> Mat<C64> {
                self.matrix
            }

            pub fn adjoint(&self) -> Self {
                Self { matrix: self.matrix.adjoint().to_owned(), basis: self.basis }
            }

            pub fn scaled(&self, factor: f64) -> Self {
                Self { matrix: &self.matrix * faer::Scale(real(factor)), basis: self.basis }
            }

            pub fn plus(&self, other: &Self) -> Result<Self> {
                if self.basis != other.basis {
                    return Err(OttoError::DimensionMismatch {
                        expected: self.basis.n_levels(),
                        found: other.basis.n_levels(),
                    });
                }
                Ok(Self { matrix: &self.matrix + &other.matrix, basis: self.basis })
            }

            pub fn times(&self, other: &Self) -> Result<Self> {
                if self.basis != other.basis {
                    return Err(OttoError::DimensionMismatch {
                        expected: self.basis.n_levels(),
                        found: other.basis.n_levels(),
                    });
                }
                Ok(Self { matrix: linalg::mul(self.matrix.as_ref(), other.matrix.as_ref()), basis: self.basis })
            }

            pub fn hermiticity_defect(&self) -> f64 {
                linalg::hermiticity_defect(self.matrix.as_ref())
            }
        }

        impl Operator for $name {
            fn matrix(&self) -> MatRef<'_, C64> {
                self.matrix.as_ref()
            }
            fn basis(&self) -> FockBasis {
                self.basis
            }
            fn modes(&self) -> Modes {
                $modes
            }
        }
    };
}

operator_type!(
    /// Operator on a single truncated oscillator mode.
    ModeOperator,
    Modes::Single
);

operator_type!(
    /// Operator on the gas (x) bath space, gas-first ordering.
    CompositeOperator,
    Modes::Pair
);

/// Annihilation operator, `<n-1|a|n> = sqrt(n)`.
pub fn lowering_operator(basis: FockBasis) -> ModeOperator {
    let n = basis.n_levels();
    let matrix = Mat::from_fn(n, n, |i, j| if j == i + 1 { real((j as f64).sqrt()) } else { ZERO });
    ModeOperator { matrix, basis }
}

pub fn raising_operator(basis: FockBasis) -> ModeOperator {
    lowering_operator(basis).adjoint()
}

/// `a^dagger a`, diagonal.
pub fn number_operator(basis: FockBasis) -> ModeOperator {
    let n = basis.n_levels();
    let matrix = Mat::from_fn(n, n, |i, j| if i == j { real(i as f64) } else { ZERO });
    ModeOperator { matrix, basis }
}

/// `x = (a + a^dagger) / sqrt(2)` in oscillator-length units.
pub fn position_operator(basis: FockBasis) -> ModeOperator {
    let n = basis.n_levels();
    let matrix = Mat::from_fn(n, n, |i, j| {
        if j == i + 1 {
            real((j as f64 / 2.0).sqrt())
        } else if i == j + 1 {
            real((i as f64 / 2.0).sqrt())
        } else {
            ZERO
        }
    });
    ModeOperator { matrix, basis }
}

/// Harmonic-oscillator eigenfunction `<x|n>` in oscillator-length units.
///
/// Uses the normalized three-term recurrence, which stays finite for the
/// level counts used here (the Hermite polynomials themselves overflow).
pub fn oscillator_wavefunction(n: usize, x: f64) -> f64 {
    oscillator_wavefunctions(n + 1, x)[n]
}

/// `Psi_0(x) .. Psi_{count-1}(x)` in one pass of the recurrence.
pub fn oscillator_wavefunctions(count: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let psi0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    out.push(psi0);
    if count == 1 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * x * psi0);
    for k in 2..count {
        let kf = k as f64;
        let next = (2.0 / kf).sqrt() * x * out[k - 1] - ((kf - 1.0) / kf).sqrt() * out[k - 2];
        out.push(next);
    }
    out
}

/// Kronecker product `a (x) b` with `a` on the gas factor.
pub fn tensor_product(gas: &ModeOperator, bath: &ModeOperator) -> Result<CompositeOperator> {
    if gas.basis != bath.basis {
        return Err(OttoError::DimensionMismatch { expected: gas.basis.n_levels(), found: bath.basis.n_levels() });
    }
    Ok(CompositeOperator { matrix: kron(gas.matrix.as_ref(), bath.matrix.as_ref()), basis: gas.basis })
}

pub(crate) fn kron(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> Mat<C64> {
    let n = a.nrows();
    let m = b.nrows();
    let mut out = Mat::zeros(n * m, n * m);
    for gj in 0..n {
        for gi in 0..n {
            let aij = a[(gi, gj)];
            if aij == ZERO {
                continue;
            }
            for bj in 0..m {
                for bi in 0..m {
                    out[(gi * m + bi, gj * m + bj)] = aij * b[(bi, bj)];
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, trace};

    fn basis(n: usize) -> FockBasis {
        FockBasis::new(n).unwrap()
    }

    #[test]
    fn rejects_tiny_basis() {
        assert!(FockBasis::new(1).is_err());
        assert!(FockBasis::new(0).is_err());
        assert_eq!(basis(3).dim(Modes::Pair), 9);
    }

    #[test]
    fn lowering_entries() {
        let a = lowering_operator(basis(3));
        assert_eq!(a.matrix()[(0, 1)], real(1.0));
        assert_eq!(a.matrix()[(1, 2)], real(2f64.sqrt()));
        assert_eq!(a.matrix()[(1, 0)], ZERO);
        // a|0> = 0
        assert!((0..3).all(|i| a.matrix()[(i, 0)] == ZERO));
    }

    #[test]
    fn commutator_is_identity_on_leading_block() {
        let b = basis(12);
        let a = lowering_operator(b);
        let ad = raising_operator(b);
        let comm = &a.times(&ad).unwrap().into_matrix() - &ad.times(&a).unwrap().into_matrix();
        let n = b.n_levels() - 1;
        for i in 0..n {
            for j in 0..n {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((comm[(i, j)] - real(expected)).norm() < 1e-14);
            }
        }
        // truncation corner: [a, a^dagger] = -(n_levels - 1) there
        assert!((comm[(n, n)] - real(-(n as f64))).norm() < 1e-13);
    }

    #[test]
    fn position_is_ladder_average() {
        let b = basis(9);
        let x = position_operator(b);
        let sum = lowering_operator(b).plus(&raising_operator(b)).unwrap().scaled(std::f64::consts::FRAC_1_SQRT_2);
        assert!(max_abs_diff(x.matrix(), sum.matrix()) < 1e-15);
        assert_eq!(x.matrix()[(0, 1)], real(0.5f64.sqrt()));
        assert!((0..9).all(|i| x.matrix()[(i, i)] == ZERO));
        assert_eq!(x.hermiticity_defect(), 0.0);
    }

    #[test]
    fn wavefunction_values() {
        let pi_q = std::f64::consts::PI.powf(-0.25);
        assert!((oscillator_wavefunction(0, 0.0) - pi_q).abs() < 1e-15);
        assert!((oscillator_wavefunction(0, 0.0) - 0.7511255444649425).abs() < 1e-15);
        assert_eq!(oscillator_wavefunction(1, 0.0), 0.0);
        // Psi_2(x) = (2x^2 - 1) Psi_0 / sqrt(2)
        let x = 0.7;
        let closed = (2.0 * x * x - 1.0) / 2f64.sqrt() * pi_q * (-x * x / 2.0).exp();
        assert!((oscillator_wavefunction(2, x) - closed).abs() < 1e-15);
    }

    #[test]
    fn kron_of_identities_and_traces() {
        let b = basis(4);
        let id = tensor_product(&ModeOperator::identity(b), &ModeOperator::identity(b)).unwrap();
        assert_eq!(max_abs_diff(id.matrix(), CompositeOperator::identity(b).matrix()), 0.0);

        let x = position_operator(b).plus(&number_operator(b)).unwrap();
        let n = number_operator(b).plus(&ModeOperator::identity(b)).unwrap();
        let t = tensor_product(&x, &n).unwrap();
        let lhs = trace(t.matrix());
        let rhs = trace(x.matrix()) * trace(n.matrix());
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn kron_2x2_by_hand() {
        let b = basis(2);
        let a = ModeOperator::from_matrix(
            Mat::from_fn(2, 2, |i, j| C64::new([[1.0, 2.0], [3.0, 4.0]][i][j], if i == j { 0.0 } else { 1.0 })),
            b,
        )
        .unwrap();
        let c = ModeOperator::from_matrix(Mat::from_fn(2, 2, |i, j| real([[0.0, 5.0], [6.0, 7.0]][i][j])), b).unwrap();
        let t = tensor_product(&a, &c).unwrap();
        let a01 = C64::new(2.0, 1.0);
        let a10 = C64::new(3.0, 1.0);
        let expected: [[C64; 4]; 4] = [
            [real(0.0), real(5.0), a01 * 0.0, a01 * 5.0],
            [real(6.0), real(7.0), a01 * 6.0, a01 * 7.0],
            [a10 * 0.0, a10 * 5.0, real(0.0), real(20.0)],
            [a10 * 6.0, a10 * 7.0, real(24.0), real(28.0)],
        ];
        for (i, row) in expected.iter().enumerate() {
            for (j, want) in row.iter().enumerate() {
                assert_eq!(t.matrix()[(i, j)], *want, "({i},{j})");
            }
        }
    }

    #[test]
    fn basis_mismatch_rejected() {
        assert!(tensor_product(&ModeOperator::identity(basis(2)), &ModeOperator::identity(basis(3))).is_err());
        assert!(ModeOperator::from_matrix(Mat::zeros(3, 3), basis(2)).is_err());
    }
}
