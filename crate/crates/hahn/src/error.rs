//! Crate-wide error type.
//!
//! Every fallible operation in the crate reports through [`Error`]. The
//! variants are deliberately fine-grained so callers (and tests) can match on
//! the exact failure mode instead of string content.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("exponent {what} is not on the 1/{level} lattice")]
    LevelExceeded { what: String, level: u64 },

    #[error("matrix is not upper triangular (entry at row {row}, col {col})")]
    NotUpperTriangular { row: usize, col: usize },

    #[error("bad diagonal entry at index {index}: {value}")]
    BadDiagonal { index: usize, value: String },

    #[error("integer lattice matrix has non-integer entry at row {row}, col {col}")]
    NotIntegral { row: usize, col: usize },

    #[error("division by zero")]
    DivisionByZero,

    #[error("conjugation is not defined on the rationals")]
    ConjugationOnRationals,

    #[error("field is not ordered")]
    UnorderedField,

    #[error("no exact root available for {0}")]
    RootUnavailable(String),

    #[error("series is not a unit (valuation must be zero)")]
    NotAUnit,

    #[error("zero series raised to a negative power")]
    ZeroToNegativePower,

    #[error("operation is undefined on the zero series")]
    ZeroSeries,

    #[error("series is not a 1-unit (needs valuation zero and constant term one)")]
    NotOneUnit,

    #[error("descriptor mismatch: {0}")]
    MixedDescriptors(String),

    #[error("truncation cutoff cannot be reached: {0}")]
    CutoffUnreachable(String),

    #[error("probe images do not define a valuation preserving automorphism: {0}")]
    NotValuationPreserving(String),

    #[error("residue action does not match a known field automorphism")]
    UnrecognizedFieldAut,

    #[error("automorphism is not internal: {0}")]
    NotInternal(String),

    #[error("round-trip verification failed on probe {0}")]
    RoundTripMismatch(String),

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("moebius map has no Laurent expansion at the origin")]
    NotExpandable,

    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(String),

    #[error("syntax error at offset {position}: {message}")]
    SyntaxError { position: usize, message: String },

    #[error("unknown verification suite `{0}`")]
    UnknownSuite(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
