use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed line in a scenario document.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("line {line}: invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue { line: usize, key: String, value: String, reason: String },

    /// A scenario invariant does not hold.
    #[error("constraint violated: {0}")]
    Constraint(String),

    /// An argument outside the domain of a model function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A KPI whose denominator is empty.
    #[error("undefined: {0}")]
    Undefined(String),

    /// Reports or record pools from different scenarios were combined.
    #[error("scenario mismatch: {0}")]
    ScenarioMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
