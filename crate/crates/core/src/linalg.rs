//! Dense complex matrix helpers shared by the operator, state and propagator
//! modules. Everything runs sequentially; callers parallelize across
//! independent runs instead.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par, Side};

use crate::error::{OttoError, Result};

pub type C64 = faer::c64;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub(crate) fn real(x: f64) -> C64 {
    C64 { re: x, im: 0.0 }
}

/// `a * b`.
pub fn mul(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> Mat<C64> {
    let mut out = Mat::zeros(a.nrows(), b.ncols());
    matmul(out.as_mut(), Accum::Replace, a, b, ONE, Par::Seq);
    out
}

/// `u * rho * u^dagger`, symmetrized so the result is exactly Hermitian.
pub fn conjugate(u: MatRef<'_, C64>, rho: MatRef<'_, C64>) -> Mat<C64> {
    let left = mul(u, rho);
    let mut out = Mat::zeros(u.nrows(), u.nrows());
    matmul(out.as_mut(), Accum::Replace, left.as_ref(), u.adjoint(), ONE, Par::Seq);
    hermitize(out)
}

/// `u^dagger * rho * u`.
pub fn conjugate_adjoint(u: MatRef<'_, C64>, rho: MatRef<'_, C64>) -> Mat<C64> {
    let mut left = Mat::zeros(u.ncols(), rho.ncols());
    matmul(left.as_mut(), Accum::Replace, u.adjoint(), rho, ONE, Par::Seq);
    hermitize(mul(left.as_ref(), u))
}

/// Replace `m` by `(m + m^dagger) / 2`.
pub fn hermitize(mut m: Mat<C64>) -> Mat<C64> {
    let n = m.nrows();
    for j in 0..n {
        m[(j, j)].im = 0.0;
        for i in (j + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
    m
}

/// Largest element of `|m - m^dagger|`.
pub fn hermiticity_defect(m: MatRef<'_, C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in j..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs_diff(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

pub fn trace(m: MatRef<'_, C64>) -> C64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

/// Largest element of `|u^dagger u - 1|`.
pub fn unitarity_defect(u: MatRef<'_, C64>) -> f64 {
    let n = u.nrows();
    let mut gram = Mat::zeros(n, n);
    matmul(gram.as_mut(), Accum::Replace, u.adjoint(), u, ONE, Par::Seq);
    for i in 0..n {
        gram[(i, i)] -= ONE;
    }
    gram.norm_max()
}

fn is_real(m: MatRef<'_, C64>) -> bool {
    (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].im == 0.0))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Real symmetric input (the common case: every Hamiltonian built here is
/// real) goes through the real solver, which is roughly twice as fast.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Mat<C64>,
}

impl HermitianEigen {
    pub fn new(m: MatRef<'_, C64>) -> Result<Self> {
        if is_real(m) {
            let re = Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re);
            let evd = re.self_adjoint_eigen(Side::Lower).map_err(|_| OttoError::Eigendecomposition)?;
            let values = (0..m.nrows()).map(|i| evd.S()[i]).collect();
            let u = evd.U();
            let vectors = Mat::from_fn(m.nrows(), m.ncols(), |i, j| real(u[(i, j)]));
            Ok(Self { values, vectors })
        } else {
            let evd = m.self_adjoint_eigen(Side::Lower).map_err(|_| OttoError::Eigendecomposition)?;
            let values = (0..m.nrows()).map(|i| evd.S()[i].re).collect();
            Ok(Self { values, vectors: evd.U().to_owned() })
        }
    }

    /// `V diag(f(lambda)) V^dagger`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> Mat<C64> {
        let n = self.values.len();
        let weights: Vec<C64> = self.values.iter().map(|&e| f(e)).collect();
        let scaled = Mat::from_fn(n, n, |i, j| self.vectors[(i, j)] * weights[j]);
        let mut out = Mat::zeros(n, n);
        matmul(out.as_mut(), Accum::Replace, scaled.as_ref(), self.vectors.adjoint(), ONE, Par::Seq);
        out
    }
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: MatRef<'_, C64>) -> Result<Vec<f64>> {
    if is_real(m) {
        let re = Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re);
        re.self_adjoint_eigenvalues(Side::Lower).map_err(|_| OttoError::Eigendecomposition)
    } else {
        let vals = m.self_adjoint_eigenvalues(Side::Lower).map_err(|_| OttoError::Eigendecomposition)?;
        Ok(vals)
    }
}
