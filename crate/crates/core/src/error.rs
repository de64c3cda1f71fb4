use thiserror::Error;

/// Errors raised by the pencil, Morse, model and oracle computations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian: {0}")]
    NotHermitian(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// `det(R + 2sL)` vanishes identically (or a chamber carries a zero eigenvalue).
    #[error("degenerate pencil at {location}: {detail}")]
    DegeneratePencil { location: String, detail: String },

    #[error("zero extremal mass: the degree-{q} chamber set is empty on [-{delta}, {delta}]")]
    ZeroExtremalMass { q: usize, delta: f64 },

    #[error("chamber boundary touched at eta = {eta}: eigenvalue ordering is ambiguous")]
    ChamberBoundaryTouched { eta: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("calibration failure: {0}")]
    Calibration(String),
}

impl Error {
    pub(crate) fn degenerate(location: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::DegeneratePencil {
            location: location.into(),
            detail: detail.into(),
        }
    }

    /// Re-labels the location of a degenerate-pencil error, leaving other variants untouched.
    pub fn at(self, location: impl Into<String>) -> Self {
        match self {
            Error::DegeneratePencil { detail, .. } => Error::DegeneratePencil {
                location: location.into(),
                detail,
            },
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
