use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value during training: {0}")]
    NonFinite(String),

    #[error("incompatible checkpoint: {0}")]
    Checkpoint(String),

    #[error("stage `{stage}` failed{}: {source}", case_suffix(.case_id))]
    Stage {
        stage: String,
        case_id: Option<String>,
        #[source]
        source: Box<Error>,
    },
}

fn case_suffix(case_id: &Option<String>) -> String {
    match case_id {
        Some(id) => format!(" on case `{id}`"),
        None => String::new(),
    }
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_stage(self, stage: &str, case_id: Option<&str>) -> Self {
        Error::Stage {
            stage: stage.to_string(),
            case_id: case_id.map(str::to_string),
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for failures caused by numerics rather than input data.
    pub fn is_numeric(&self) -> bool {
        matches!(self.root(), Error::NonFinite(_) | Error::Shape(_))
    }
}
