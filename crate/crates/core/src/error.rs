use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("size {size} exceeds the configured bound {limit}")]
    SizeExceeded { size: u128, limit: u128 },
    #[error("no monic irreducible polynomial of degree {k} over F_{p}")]
    NoIrreducible { p: u32, k: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("operation not applicable: {0}")]
    NotApplicable(String),
    #[error("element {0} is not a square")]
    NotASquare(u32),
    #[error("{r} is not the order of a subfield of F_{q}")]
    NotASubfieldOrder { r: u32, q: u32 },
    #[error("field order {0} is not a perfect square")]
    NotSquareOrder(u32),
    #[error("field of even characteristic not allowed here")]
    EvenCharacteristic,
    #[error("graph is not strongly regular: {0}")]
    NotStronglyRegular(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("independent routes disagree: {0}")]
    RouteDisagreement(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
