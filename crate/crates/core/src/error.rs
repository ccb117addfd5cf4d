use thiserror::Error;

/// Errors raised by the core operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("vector must have positive length")]
    EmptyVector,
    #[error("decimation requires gcd(k,ℓ)=1 (k = {k}, ℓ = {modulus})")]
    NonUnit { k: usize, modulus: usize },
    #[error("{delta} does not divide length {length}")]
    NotDivisor { delta: usize, length: usize },
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("entry {value} at index {index} is outside 0..={max}")]
    EntryOutOfRange { index: usize, value: i64, max: i64 },
    #[error("vector is not binary")]
    NotBinary,
    #[error("density {actual} does not match the required {expected}")]
    DensityMismatch { expected: i64, actual: i64 },
    #[error("density {density} is not coprime to length {length}")]
    DensityNotCoprime { density: i64, length: usize },
    #[error("shape mismatch: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    ShapeMismatch {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error("invalid factorization {length} = {d1} x {d2}: {reason}")]
    InvalidFactorization {
        length: usize,
        d1: usize,
        d2: usize,
        reason: &'static str,
    },
    #[error("vector is not a compression of the given sequence")]
    NotACompression,
    #[error("internal invariant violated: {0}")]
    Invariant(&'static str),
    #[error("instance too large for exhaustive reference ({size} > {limit})")]
    TooLarge { size: usize, limit: usize },
    #[error("pair is not complementary (first failing lag {lag})")]
    NotComplementary { lag: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
