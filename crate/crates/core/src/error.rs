use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A required column or header is absent.
    #[error("schema error: missing required column `{column}`")]
    MissingColumn { column: String },

    /// A CSV data row failed validation. `row` is the 0-based data row index.
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },

    /// A line-delimited record failed to parse or validate. `line` is 1-based.
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },

    #[error("line {line}: duplicate id `{id}`")]
    DuplicateId { line: usize, id: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("score coverage error: missing {missing:?}, unknown {unknown:?}")]
    Coverage {
        missing: Vec<String>,
        unknown: Vec<String>,
    },

    #[error("cosine similarity undefined for a zero-norm vector")]
    UndefinedSimilarity,

    #[error("shape mismatch in {what}: expected {expected}, got {got}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("text has no tokens")]
    EmptyText,

    #[error("non-finite gradient in parameter block `{block}` at index {index}")]
    NonFiniteGradient { block: &'static str, index: usize },

    #[error("negative sourcing failed for `{id}`: {reason}")]
    Sourcing { id: String, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("vocabulary hash mismatch: expected {expected}, found {found}")]
    VocabMismatch { expected: String, found: String },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by malformed or invalid input data.
    pub fn is_schema(&self) -> bool {
        matches!(
            self,
            Error::MissingColumn { .. }
                | Error::Row { .. }
                | Error::Line { .. }
                | Error::DuplicateId { .. }
                | Error::Validation(_)
                | Error::Coverage { .. }
                | Error::Csv(_)
                | Error::Json(_)
        )
    }
}

pub(crate) fn read_file(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}
