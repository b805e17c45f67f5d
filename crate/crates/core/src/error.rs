use thiserror::Error;

/// Errors produced anywhere in the simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {context} (line {line}, column {column}): {message}")]
    Parse {
        context: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid {entity}: {message}")]
    Invariant { entity: String, message: String },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("codebook is empty")]
    EmptyCodebook,

    #[error("codebook of 2^{bits} vectors exceeds the configured cap of 2^{max_bits}")]
    CodebookBudget { bits: u32, max_bits: u32 },

    #[error("stacked effective channel is singular (condition number {condition:e})")]
    Singular { condition: f64 },

    #[error("statistics require a non-empty sample")]
    EmptySample,

    #[error("vehicle grids differ: {0}")]
    GridMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invariant(entity: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invariant {
            entity: entity.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag used by the CLI's JSON error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Invariant { .. } => "invariant",
            Error::Dimension { .. } => "dimension",
            Error::EmptyCodebook => "empty-codebook",
            Error::CodebookBudget { .. } => "codebook-budget",
            Error::Singular { .. } => "singular",
            Error::EmptySample => "empty-sample",
            Error::GridMismatch(_) => "grid-mismatch",
            Error::Config(_) => "config",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
