use thiserror::Error;

/// Errors raised by the simulator library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A numeric argument is outside its domain (e.g. a non-positive variance).
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// Bit or symbol sequences whose lengths do not line up.
    #[error("framing error: {0}")]
    Framing(String),
    /// An experiment or scenario description that violates its invariants.
    #[error("configuration error: {0}")]
    Configuration(String),
    /// A sweep point failed; carries the grid value that failed.
    #[error("sweep point {x_db} dB failed: {source}")]
    Point {
        x_db: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
