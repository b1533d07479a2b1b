use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("refused: {0}")]
    Refused(String),
    #[error("insufficient precision: {0}")]
    Precision(String),
    #[error("existence window exhausted: {0}")]
    Exhausted(String),
    #[error("malformed record: {0}")]
    Malformed(String),
}
