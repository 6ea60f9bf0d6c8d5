use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("coordinate {index} is not finite")]
    NonFinite { index: usize },

    #[error("coordinate {index} has modulus {modulus} >= 1, outside the open polydisc")]
    OutsidePolydisc { index: usize, modulus: f64 },

    #[error("dimension must be at least 1")]
    EmptyDimension,

    #[error("invalid metric parameters: t = {t}, k = {k} (need t >= 0, k >= 2)")]
    InvalidParams { t: f64, k: u32 },

    #[error("radius cap {0} must lie in (0, 1)")]
    InvalidRadiusCap(f64),

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("tangent vector must be nonzero")]
    ZeroVector,

    #[error("linear map is not admissible: target row {row} has absolute row sum {sum} > 1")]
    InadmissibleLinear { row: usize, sum: f64 },

    #[error("map leaves the target polydisc (coordinate {index} has modulus {modulus})")]
    LeavesTarget { index: usize, modulus: f64 },

    #[error("map does not fix the origin (|f(0)| = {0})")]
    OriginNotFixed(f64),

    #[error("permutation is not a bijection of 0..{0}")]
    InvalidPermutation(usize),

    #[error("invalid map specification: {0}")]
    InvalidMap(String),

    #[error("unsupported map family: {0}")]
    UnsupportedFamily(String),

    #[error("invalid convex factor: {0}")]
    InvalidFactor(String),

    #[error("indicatrix resolution {0} must be at least 8")]
    InvalidResolution(usize),

    #[error("singular matrix")]
    Singular,
}

pub type Result<T> = std::result::Result<T, Error>;
