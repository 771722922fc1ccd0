use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter set that cannot describe a valid link.
    #[error("configuration error: {0}")]
    Config(String),
    /// An argument outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("bit length mismatch: expected {expected}, got {got}")]
    BitLength { expected: usize, got: usize },
    #[error("singular channel: |H| = {magnitude:e} at bin {bin}")]
    SingularChannel { bin: usize, magnitude: f64 },
    #[error(
        "target BER {target:e} not reached on the search grid (best {best_ber:e} at {best_db} dB)"
    )]
    Unreachable {
        target: f64,
        best_ber: f64,
        best_db: f64,
    },
}
