use finsler_core::GeometryError;
use thiserror::Error;

/// Failures that stop a command before any verdict is reached.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("model file, line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("{0}")]
    Input(String),
}

impl CliError {
    /// Process exit status for input errors.
    pub const EXIT_CODE: i32 = 2;
}
