use thiserror::Error;

pub type Result<T, E = PolyError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("vectors of mixed dimensions ({0} vs {1})")]
    MixedDimensions(usize, usize),
    #[error("zero vector where a nonzero direction is required")]
    ZeroVector,
    #[error("empty point set")]
    EmptyInput,
    #[error("input too large: {0}")]
    TooLarge(String),
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("vertex set is not a face of the polytope")]
    NotAFace,
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("Euler relation violated by f-vector {0:?}")]
    EulerViolation(Vec<u64>),
    #[error("inconsistent face lattice: {0}")]
    LatticeInconsistent(String),
    #[error("bad family spec: {0}")]
    BadSpec(String),
    #[error("bound violated (toolkit bug), counterexample: {0}")]
    BoundViolated(String),
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(i64),
    #[error("direction is not in general position")]
    NotGeneralPosition,
    #[error("facet normal orthogonal to direction (facet {0})")]
    ZeroDotProduct(usize),
    #[error("no general-position direction after {0} retries")]
    RetriesExhausted(usize),
    #[error("dimension {0} too low for this operation")]
    DimensionTooLow(i64),
    #[error("diagram vertex is not interior")]
    NotInterior,
    #[error("parse error: {0}")]
    Parse(String),
}
