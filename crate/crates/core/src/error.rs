use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid size {0} is not a power of two")]
    NonPowerOfTwo(usize),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("matrix decomposition failed: {0}")]
    Decomposition(String),

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("sequence too short: length {len}, need at least {needed}")]
    SequenceTooShort { len: usize, needed: usize },

    #[error("zero singular value at index {0} inside the fit window")]
    ZeroInWindow(usize),

    #[error("symbol is not invertible on the circle (min modulus {min_modulus:e})")]
    NotInvertible { min_modulus: f64 },

    #[error("kernel evaluated at its pole z*zeta = 1")]
    KernelPole,

    #[error("quadrature grid {grid} too coarse for symbol band {band}")]
    GridTooCoarse { grid: usize, band: u64 },

    #[error("mode tuple does not sum to zero")]
    NotInZeroSumSet,

    #[error("{what} of size {size} exceeds the cap {cap}")]
    Resource { what: &'static str, size: u128, cap: u128 },
}
