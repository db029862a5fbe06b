use thiserror::Error;

/// Errors raised by the library.
///
/// Mathematical-check failures (a set that is not Kakeya, a rank below a
/// bound) are reported through result structs, never through this type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("moduli do not match: expected {expected}, found {found}")]
    ModulusMismatch { expected: u64, found: u64 },

    #[error("vector {0:?} has no unit coordinate modulo some prime power of the modulus")]
    NotProjective(Vec<u64>),

    #[error("element is not p-integral: cleared denominator {denominator} is divisible by {p}")]
    NotPIntegral { p: u64, denominator: String },

    #[error("cannot invert zero")]
    ZeroInverse,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("rings do not match: {0}")]
    RingMismatch(String),

    #[error("budget exceeded: {what} needs {needed}, limit is {limit}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn check_budget(what: &'static str, needed: u128, limit: u128) -> Result<()> {
    if needed > limit {
        Err(Error::BudgetExceeded {
            what,
            needed,
            limit,
        })
    } else {
        Ok(())
    }
}
