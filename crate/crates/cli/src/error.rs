use std::path::PathBuf;

use thiserror::Error;

/// One problem found while reading an input row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    /// 1-based line number in the file, counting the header.
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("missing column(s) in {path}: {}", .columns.join(", "))]
    MissingColumns { path: PathBuf, columns: Vec<String> },
    #[error("{} invalid row(s) in {path}:\n{}", .errors.len(), format_rows(.errors))]
    Rows { path: PathBuf, errors: Vec<RowError> },
    #[error(transparent)]
    Model(#[from] bayes_rmst::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Process exit status: 2 for usage errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

fn format_rows(errors: &[RowError]) -> String {
    const SHOWN: usize = 20;
    let mut out: Vec<String> = errors
        .iter()
        .take(SHOWN)
        .map(|e| format!("  line {}: {}", e.line, e.message))
        .collect();
    if errors.len() > SHOWN {
        out.push(format!("  ... and {} more", errors.len() - SHOWN));
    }
    out.join("\n")
}

pub type Result<T> = std::result::Result<T, CliError>;
