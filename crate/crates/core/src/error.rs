use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("lattice generator matrix is singular")]
    DegenerateLattice,

    #[error("derivative order {order} exceeds the configured maximum {max}")]
    OrderOverflow { order: u32, max: u32 },

    #[error("tail bound {bound:.3e} cannot be certified below {tolerance:.3e} (radius {radius})")]
    TailCertification { bound: f64, tolerance: f64, radius: f64 },

    #[error("frequency {frequency} lies outside the tabulated range [0, {max}]")]
    FrequencyOutOfRange { frequency: f64, max: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("distribution is not a measure (found derivative order {0})")]
    NotAMeasure(u32),

    #[error("point atoms have no Fourier transform inside the comb class")]
    AtomsNotTransformable,

    #[error("need at least {needed} points, got {found}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
