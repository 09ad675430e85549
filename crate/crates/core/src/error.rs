use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Dimensions or indices that do not fit together.
    #[error("structural error: {0}")]
    Structural(String),

    /// A family specification that violates its own invariants.
    #[error("validation error: {0}")]
    Validation(String),

    /// The caller asked for something the chosen options cannot provide.
    #[error("configuration error: {0}")]
    Config(String),

    /// Enumeration refused rather than truncated.
    #[error("budget exceeded: {what} needs {needed} but the limit is {limit}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        limit: u64,
    },

    #[error("malformed JSON in {source_name}: {source}")]
    Json {
        source_name: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn structural(msg: impl Into<String>) -> Error {
    Error::Structural(msg.into())
}

pub(crate) fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
