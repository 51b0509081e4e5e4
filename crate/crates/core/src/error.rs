use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// A value that should have been an exact multiple was not. In the
    /// protocols this is the tamper / wrong-key signal.
    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("{0} is not invertible modulo {1}")]
    NotInvertible(String, String),

    #[error("value out of range: {0}")]
    Range(String),

    #[error("invalid key: {0}")]
    InvalidKey(String),

    #[error("no generator found after {0} candidates")]
    GeneratorSearchExhausted(usize),

    #[error("ambiguous watermark recovery: recovered N = {recovered} exceeds {limit}")]
    Ambiguous { recovered: String, limit: u64 },

    #[error("malformed ciphertext: {0}")]
    MalformedCiphertext(String),

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("symmetric authentication failed")]
    Authentication,

    #[error("setup aborted: {0}")]
    Setup(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
