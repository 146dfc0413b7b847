use thiserror::Error;

use crate::liouvillian::SectorLabel;

/// Errors raised by the operator algebra, the Liouvillian machinery and the
/// analyses built on them.
///
/// Numerical payloads are carried as `f64` regardless of the scalar type the
/// computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("index {index} out of range for {len} sites")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("L = {sites} exceeds the dense superoperator cap of {cap}; use the sector-blocked path")]
    ResourceLimit { sites: usize, cap: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("eigensolver failed to converge in sector {sector}")]
    EigenSolver { sector: SectorLabel },

    #[error("block {sector} is defective near eigenvalue cluster {cluster:?}")]
    Defective {
        sector: SectorLabel,
        /// `(re, im)` of every eigenvalue in the offending cluster.
        cluster: Vec<(f64, f64)>,
    },

    #[error("kernel projection is not positive: minimum eigenvalue {min_eigenvalue:e}")]
    PositivityViolation { min_eigenvalue: f64 },

    #[error("numerical quality check failed: {0}")]
    NumericalQuality(String),

    #[error("integrator step size underflow at t = {t} (h = {step:e}); problem too stiff")]
    Stiffness { t: f64, step: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("spectrum mismatch: {0}")]
    SpectrumMismatch(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
