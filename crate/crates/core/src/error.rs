use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The requested register layout does not fit under the qubit cap.
    #[error("register layout of {requested} qubits exceeds the cap of {cap}")]
    Capacity { requested: usize, cap: usize },

    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Post-selection on an outcome whose probability is at or below the
    /// impossibility threshold.
    #[error("outcome {outcome} has probability {probability:e}, conditional state is undefined")]
    ImpossibleOutcome { outcome: String, probability: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
