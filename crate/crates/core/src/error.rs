use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("index {index} out of range 1..={bound}")]
    IndexOutOfRange { index: usize, bound: usize },
    #[error("character {0} lies outside {{0, f_1, ..., f_(j+1)}}")]
    OutsideProjectionDomain(String),
    #[error("intersection table has no entry for degree-{degree} monomial {monomial}")]
    MissingTableEntry { monomial: String, degree: u32 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("malformed weights: {0}")]
    MalformedWeights(String),
    #[error("invalid bundle data: {0}")]
    InvalidBundle(String),
    #[error("subobject #{index} is malformed: {message}")]
    MalformedSubobject { index: usize, message: String },
    #[error("no positive epsilon satisfies {0}")]
    NoPositiveEpsilon(String),
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(String),
    #[error("subobject #{index} has the same slope polynomial as the parent (exact tie at every epsilon)")]
    IdenticalSlopes { index: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
