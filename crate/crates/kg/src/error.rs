use std::fmt;

use thiserror::Error;

/// Location of a lexical or grammatical problem in a source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub token: String,
    pub message: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {} (at `{}`)",
            self.line, self.column, self.message, self.token
        )
    }
}

impl std::error::Error for SyntaxError {}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KgError {
    #[error("malformed triple: {0}")]
    Structural(String),
    #[error("invalid literal `{lexical}` for datatype {datatype}")]
    InvalidLiteral { lexical: String, datatype: String },
    #[error("syntax error: {0}")]
    Syntax(#[from] SyntaxError),
    #[error("index audit failed: {0}")]
    Audit(String),
}
