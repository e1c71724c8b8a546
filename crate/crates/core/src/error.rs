use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum OttoError {
    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max |A - A^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("state trace is {trace}, expected 1")]
    TraceNotUnity { trace: f64 },

    #[error("state has negative eigenvalue {eigenvalue:e}")]
    NotPositive { eigenvalue: f64 },

    #[error("eigendecomposition failed to converge")]
    Eigendecomposition,

    #[error("quadrature did not converge: max element change {change:e} at {nodes} nodes")]
    QuadratureNotConverged { nodes: usize, change: f64 },

    #[error(
        "propagator unitarity defect {defect:e} exceeds {limit:e} \
         ({steps} steps of {dtau:e}; reduce the step, e.g. a divisor above {divisor})"
    )]
    UnitarityDefect { defect: f64, limit: f64, steps: usize, dtau: f64, divisor: f64 },

    #[error("energy has imaginary part {imaginary:e}")]
    ComplexEnergy { imaginary: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("cycle {cycle}, {stroke}: {source}")]
    Cycle {
        cycle: usize,
        stroke: &'static str,
        #[source]
        source: Box<OttoError>,
    },
}

pub type Result<T> = std::result::Result<T, OttoError>;

impl OttoError {
    /// Whether the error stems from the requested parameters rather than from
    /// the numerics.
    pub fn is_configuration(&self) -> bool {
        matches!(self, OttoError::InvalidParameter { .. } | OttoError::InvalidBasis(_))
    }
}

pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> OttoError {
    OttoError::InvalidParameter { name: name.into(), reason: reason.into() }
}
