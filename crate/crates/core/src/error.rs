use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension {requested} exceeds the configured maximum {max}")]
    SizeOverflow { requested: usize, max: usize },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid dimensions: {0}")]
    InvalidDims(String),

    #[error("matrix is not Hermitian (max |M - M^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (max |U^dagger U - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("{what} is not normalized (norm = {norm})")]
    NotNormalized { what: &'static str, norm: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("robustness constraint violated: max |<j|h_cb|0>| = {violation:e} > {tol:e}")]
    RobustnessViolation { violation: f64, tol: f64 },

    #[error("commutation constraint violated: {which} = {norm:e} > {tol:e}")]
    CommutatorViolation {
        which: &'static str,
        norm: f64,
        tol: f64,
    },

    #[error("unperturbed C-B spectrum is fully degenerate (spread {spread:e})")]
    DegenerateSpectrum { spread: f64 },

    #[error("propagation norm drift {drift:e} exceeds {tol:e}")]
    NormDrift { drift: f64, tol: f64 },

    #[error("perturbation data does not belong to this model: {0}")]
    PerturbationMismatch(&'static str),
}

impl Error {
    /// True for failures of numerical validation (as opposed to malformed input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RobustnessViolation { .. }
                | Error::CommutatorViolation { .. }
                | Error::DegenerateSpectrum { .. }
                | Error::NormDrift { .. }
                | Error::NotUnitary { .. }
                | Error::NotHermitian { .. }
                | Error::InvalidDensityMatrix(_)
        )
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
