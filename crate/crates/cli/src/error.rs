use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("scenario file not found: {0}")]
    NotFound(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}\n  | {context}")]
    Parse {
        line: usize,
        column: usize,
        context: String,
        message: String,
    },
    #[error("scenario {scenario}: invalid {field}: {reason}")]
    Validation {
        scenario: String,
        field: String,
        reason: String,
    },
}
