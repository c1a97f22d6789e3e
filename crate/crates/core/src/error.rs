use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("malformed curve spec `{0}`")]
    CurveSpec(String),
    #[error("prime {p} exceeds the configured bound {bound}")]
    PrimeTooLarge { p: u64, bound: u64 },
    #[error("line M1 degenerates at p = {0} (p divides alpha_1)")]
    DegenerateLine(u64),
    #[error("point ({b}, {c}) is singular modulo {p}")]
    SingularPoint { p: u64, b: i128, c: i128 },
    #[error("point ({b}, {c}) does not satisfy the curve congruence modulo {p}^{k}")]
    NotOnCurve { p: u64, k: u32, b: i128, c: i128 },
    #[error("level {level} is below the stabilisation level {required}")]
    LevelTooLow { level: u32, required: u32 },
    #[error("search space {needed} exceeds budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("modulus p^k too large for fixed-width arithmetic")]
    Overflow,
    #[error("fit failed: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
