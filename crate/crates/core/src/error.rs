use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("rank error: {0}")]
    Rank(String),
    #[error("unknown type name: {0}")]
    UnknownType(String),
    #[error("ambiguous type name {name}; candidates: {}", candidates.join(", "))]
    AmbiguousType { name: String, candidates: Vec<String> },
    #[error("refused: {0}")]
    Refused(String),
    #[error("classification error: {0}")]
    Classification(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("reference data: {0}")]
    Reference(String),
}

impl Error {
    /// Classification discrepancies are distinguished from user errors at the CLI.
    pub fn is_discrepancy(&self) -> bool {
        matches!(self, Error::Classification(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
