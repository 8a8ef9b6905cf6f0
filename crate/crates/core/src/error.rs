use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid mode layout: {0}")]
    InvalidLayout(String),
    #[error("occupation {occupation} of mode {mode} exceeds cutoff {cutoff}")]
    OccupationExceedsCutoff {
        mode: usize,
        occupation: usize,
        cutoff: usize,
    },
    #[error("mode {mode} out of range for a {modes}-mode register")]
    ModeOutOfRange { mode: usize, modes: usize },
    #[error("layouts differ: {left:?} vs {right:?}")]
    LayoutMismatch { left: Vec<usize>, right: Vec<usize> },
    #[error("two-mode operation needs distinct modes, got {0} twice")]
    SameMode(usize),
    #[error("reduced dimension {dim} exceeds the dense guard {guard}")]
    DimensionGuardExceeded { dim: usize, guard: usize },
    #[error("state norm is numerically zero (norm^2 = {norm_sqr:e})")]
    ZeroNormState { norm_sqr: f64 },
    #[error("beam splitter parameters violate |t|^2 + |r|^2 = 1 (got {0})")]
    NonUnitaryParam(f64),
    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("parity derivative vanishes at phase {0}")]
    DerivativeVanishes(f64),
    #[error("cutoff {cutoff} too small, need at least {required}")]
    CutoffTooSmall { cutoff: usize, required: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
