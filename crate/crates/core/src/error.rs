use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid digit {digit} (alphabet is 1..={max})")]
    Digit { digit: u8, max: u8 },
    #[error("cylinder of the empty word is undefined")]
    EmptyWord,
    #[error("empty subshift: no allowed words of length {0}")]
    EmptySubshift(usize),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("provenance mismatch: {0}")]
    Provenance(String),
    #[error("power iteration did not converge after {iters} iterations (residual {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },
    #[error("candidate not positive; increase m or precision ({0})")]
    NotPositive(String),
    #[error("cache: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
