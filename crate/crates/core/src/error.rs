use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("precision must be at least 1 and p^N must fit in 63 bits (p = {p}, N = {precision})")]
    BadPrecision { p: u64, precision: u32 },
    #[error("operands live over different primes ({0} and {1})")]
    PrimeMismatch(u64, u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("inverse of {0} does not lie in Z[1/p]")]
    NotInvertible(String),
    #[error("precision exhausted: result is O(p^{abs_prec})")]
    PrecisionExhausted { abs_prec: i64 },
    #[error("insufficient precision: need {needed} digits, have {available}")]
    InsufficientPrecision { needed: i64, available: i64 },
    #[error("zero input where a nonzero value is required")]
    ZeroInput,
    #[error("vector is not primitive over Z[1/p]")]
    NotPrimitive,
    #[error("matrix does not have determinant one")]
    NotSpecialLinear,
    #[error("singular matrix")]
    Singular,
    #[error("matrix is outside the G+ chart (|a|_p < |b|_p)")]
    NotInGPlus,
    #[error("element is not in the level-{level} congruence neighbourhood")]
    NotInNeighborhood { level: u32 },
    #[error("vector is not on the p-adic unit circle")]
    NotOnUnitCircle,
    #[error("enumeration level too large: {0}")]
    LevelTooLarge(String),
    #[error("infeasible range: {0}")]
    Infeasible(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
