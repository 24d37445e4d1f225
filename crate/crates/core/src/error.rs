use thiserror::Error;

/// Errors raised by state construction, measures and verifiers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("every site dimension must be at least 2, got {0:?}")]
    BadSiteDims(Vec<usize>),
    #[error("total dimension {0} exceeds the supported cap of {1}")]
    TooLarge(usize, usize),
    #[error("zero vector cannot be normalized")]
    ZeroVector,
    #[error("site index {site} out of range for {sites} sites")]
    InvalidSite { site: usize, sites: usize },
    #[error("duplicate site index {0}")]
    DuplicateSite(usize),
    #[error("site set must be nonempty")]
    EmptySiteSet,
    #[error("cut must be a proper nonempty subset of the sites")]
    TrivialCut,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    NotUnitTrace(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("operation requires site dimensions {expected:?}, got {got:?}")]
    WrongDims { expected: Vec<usize>, got: Vec<usize> },
    #[error("operation requires {expected} sites, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("power must be at least 1")]
    BadPower,
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("replica permutations must be pairwise distinct")]
    NonDistinctPermutations,
    #[error("contraction needs {0} work units, above the guard of {1}")]
    SizeGuard(u128, u128),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("density rank {0} exceeds the supported maximum of {1}")]
    RankTooHigh(usize, usize),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
