use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}, column {column}: {message}")]
    Schema { line: usize, column: usize, message: String },
    #[error("config field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Library(#[from] shyp::Error),
}
