use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("symbol {symbol} has zero probability mass")]
    ZeroMass { symbol: usize },
    #[error("symbol {symbol} is outside an alphabet of size {size}")]
    OutOfRange { symbol: u64, size: u64 },
    #[error("message underflow: nothing left to decode")]
    Underflow,
    #[error("degree mismatch: expected {expected}, got {actual}")]
    DegreeMismatch { expected: usize, actual: usize },
    #[error("permutation is not a member of the group")]
    NotMember,
    #[error("malformed compressed data: {0}")]
    Format(String),
    #[error("invalid graph: {0}")]
    Graph(String),
    #[error("size limit exceeded: {0}")]
    TooLarge(String),
    #[error("dataset error: {0}")]
    Dataset(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
