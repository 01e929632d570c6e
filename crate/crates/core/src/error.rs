use thiserror::Error;

/// Errors produced by the geometric and group-theoretic routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected P^{expected}, found P^{found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported projective dimension {0} (only 1 <= n <= 3)")]
    UnsupportedDimension(usize),

    #[error("zero vector has no projective class")]
    ZeroVector,

    #[error("non-finite coordinate")]
    NonFinite,

    #[error("points coincide projectively; no unique line through them")]
    CoincidentPoints,

    #[error("lines coincide; no unique intersection point")]
    CoincidentLines,

    #[error("matrix is singular")]
    Singular,

    #[error("matrix is not square or has the wrong size: {0}")]
    BadShape(String),

    #[error("resource limit exceeded: {what} would exceed {limit}")]
    ResourceLimit { what: String, limit: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unsupported case: {0}")]
    Unsupported(String),

    #[error("point is not on the null cone (|value| = {value:e})")]
    NotNull { value: f64 },

    #[error("generator {index} does not preserve the signature (2,1) form")]
    NotPu21 { index: usize },

    #[error("base point is not inside the complex ball")]
    OutsideBall,

    #[error("discs {first} and {second} are not disjoint")]
    DiscsOverlap { first: usize, second: usize },

    #[error("lines {first} and {second} intersect")]
    LinesIntersect { first: usize, second: usize },

    #[error("matrix is not unimodular: det = {det}")]
    NotUnimodular { det: i64 },

    #[error("matrix is not hyperbolic: |trace| = {trace} <= 2")]
    NotHyperbolic { trace: i64 },

    #[error("spectrum has the wrong type: {0}")]
    SpectrumType(String),

    #[error("too many lines for exact search: {count} > {limit}")]
    TooManyLines { count: usize, limit: usize },

    #[error("degenerate configuration at node '{address}': {reason}")]
    Degenerate { address: String, reason: String },

    #[error("correspondence is not realized by a unique projective map (solution space dimension {dim})")]
    Rank { dim: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
