use thiserror::Error;

/// Errors raised by the classification, generation and experiment layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid distribution parameter: {0}")]
    Parameter(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("scale solver failed: {0}")]
    Solver(String),

    #[error("degenerate scenario: {0}")]
    Degenerate(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("insufficient innovations: needed {needed}, got {got}")]
    Length { needed: usize, got: usize },

    #[error("sample-size error: {0}")]
    SampleSize(String),

    #[error("unsupported setting: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    Argument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
