use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("parse error {0}")]
    Parse(String),
    #[error("grid error: {0}")]
    Grid(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] casimir_core::Error),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "parse",
            CliError::Grid(_) => "grid",
            CliError::Io(_) => "io",
            CliError::Core(e) => e.category(),
        }
    }

    /// One-line JSON object `{"category": …, "message": …}`.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            category: &'a str,
            message: String,
        }
        serde_json::to_string(&Report {
            category: self.category(),
            message: self.to_string(),
        })
        .expect("error report serializes")
    }
}
