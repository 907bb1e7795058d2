use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("ambient dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("a frame needs at least one vector")]
    EmptyFrame,
    #[error("vector {index} has {found} coordinates, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("vector {index} is zero")]
    ZeroVector { index: usize },
    #[error("vector {index} has norm {norm}, expected 1")]
    NonUnitVector { index: usize, norm: f64 },
    #[error("vector {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("frame does not span R^{m}")]
    NonSpanning { m: usize },
    #[error("embedding dimension overflows 128-bit integers")]
    Overflow,
    #[error("operation needs {required} bytes, over the {limit}-byte memory guard")]
    MemoryGuard { required: u128, limit: u128 },
    #[error("matrix is not a valid Gram matrix: eigenvalue {eigenvalue} relative to {largest}")]
    InvalidGram { eigenvalue: f64, largest: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no root of the level-2 polynomial for target {target} in [{lo}, {hi}]")]
    NoRootInBracket { target: f64, lo: f64, hi: f64 },
    #[error("gallery construction self-check failed: {0}")]
    ConstructionCheck(String),
    #[error("unknown gallery key `{0}`")]
    UnknownGalleryKey(String),
}
