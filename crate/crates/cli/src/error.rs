use std::fmt::Display;
use std::path::Path;

use kgraph_core::extract::ExtractError;
use kgraph_core::graph::GraphError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or flag values. Exit code 1.
    #[error("{0}")]
    Usage(String),
    /// Unreadable, malformed or inconsistent input. Exit code 2.
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    pub fn flag(flag: &str, msg: impl Display) -> Self {
        CliError::Usage(format!("invalid value for {flag}: {msg}"))
    }

    /// Data error tied to a file; parse errors carry their line.
    pub fn at(path: &Path, err: impl Into<Located>) -> Self {
        let located = err.into();
        match located.line {
            Some(line) => CliError::Data(format!("{}:{line}: {}", path.display(), located.message)),
            None => CliError::Data(format!("{}: {}", path.display(), located.message)),
        }
    }
}

#[derive(Debug)]
pub struct Located {
    pub line: Option<usize>,
    pub message: String,
}

impl Located {
    pub fn line(line: usize, message: impl Display) -> Self {
        Located { line: Some(line), message: message.to_string() }
    }
}

impl From<GraphError> for Located {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::Parse { line, column, reason } => Located::line(line, format!("column {column}: {reason}")),
            other => Located { line: None, message: other.to_string() },
        }
    }
}

impl From<ExtractError> for Located {
    fn from(e: ExtractError) -> Self {
        match e {
            ExtractError::Parse { line, reason } => Located::line(line, reason),
            other => Located { line: None, message: other.to_string() },
        }
    }
}

impl From<std::io::Error> for Located {
    fn from(e: std::io::Error) -> Self {
        Located { line: None, message: e.to_string() }
    }
}

impl From<String> for Located {
    fn from(message: String) -> Self {
        Located { line: None, message }
    }
}

impl From<&str> for Located {
    fn from(message: &str) -> Self {
        Located { line: None, message: message.to_owned() }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
