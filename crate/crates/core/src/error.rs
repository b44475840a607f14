use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("matrix is singular at the configured rank tolerance")]
    Singular,

    #[error("eigenvalue iteration failed to converge on a {0}x{0} matrix")]
    EigenFailed(usize),

    #[error("pencil spectrum is not distinct in the ground field (margin {margin:.3e}, max |imag| {max_imag:.3e})")]
    RepeatedSpectrum { margin: f64, max_imag: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no epsilon >= {floor:e} produced a distinct spectrum")]
    EpsilonExhausted { floor: f64 },

    #[error("no generic matrix found after {0} attempts")]
    GenericityExhausted(usize),

    #[error("no column dependence found (full column rank)")]
    NoDependence,

    #[error("slice span contains no non-zero singular matrix that the search could find")]
    NoSingularMember,

    #[error("numerical branch ambiguity: {0}")]
    BranchAmbiguity(String),

    #[error("certificate rejected: {0}")]
    CertificationFailed(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
