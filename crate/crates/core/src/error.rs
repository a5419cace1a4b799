use num_bigint::BigInt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("input is prime: {0}")]
    Prime(BigInt),

    #[error("input is a perfect power: {n} = {base}^{exponent}")]
    PerfectPower {
        n: BigInt,
        base: BigInt,
        exponent: u32,
    },

    #[error("degenerate basis: vector {0} is linearly dependent on its predecessors")]
    DegenerateBasis(usize),

    #[error("point not in lattice")]
    PointNotInLattice,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("value does not fit in a machine integer: {0}")]
    Overflow(String),

    #[error("degenerate relation: u - vN = 0")]
    DegenerateRelation,

    #[error("full enumeration of {0} bits refused; set a weight bound")]
    EnumerationTooLarge(usize),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
