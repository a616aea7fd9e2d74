//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the library.
///
/// Authentication failure during decryption is deliberately *not* an error:
/// it is an expected protocol outcome (see
/// [`DecryptOutcome`](crate::secure_channel::DecryptOutcome)).
#[derive(Debug, Error)]
pub enum Error {
    /// A value lies outside its documented domain (coordinate out of range,
    /// class id past the vocabulary, oversized payload, ...).
    #[error("input domain: {0}")]
    InputDomain(String),

    /// Invalid configuration (bad key length, iteration count below the
    /// floor, zero-sized grid, ...).
    #[error("configuration: {0}")]
    Config(String),

    /// An operation was invoked in a state that cannot support it.
    #[error("state: {0}")]
    State(String),

    /// Malformed wire bytes. Distinct from authentication failure.
    #[error("wire format: {0}")]
    Format(#[from] FormatError),

    /// A peer violated the transport protocol.
    #[error("protocol: {0}")]
    Protocol(String),

    /// Malformed input data (detection logs, config files, fixtures).
    #[error("data: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Precise reasons a byte string fails to decode as a wire frame.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("bad magic {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("unsupported version {0:#04x}")]
    BadVersion(u8),
    #[error("truncated frame: need {need} bytes, have {have}")]
    Truncated { need: usize, have: usize },
    #[error("{0} trailing bytes after frame")]
    TrailingBytes(usize),
    #[error("ciphertext shorter than auth tag ({0} bytes)")]
    ShortCiphertext(usize),
    #[error("nonce inconsistent with session index")]
    NonceMismatch,
}
