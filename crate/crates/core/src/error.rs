use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, L2cdsError>;

#[derive(Debug, Error)]
pub enum L2cdsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("numerical blowup: {0}")]
    NumericalBlowup(String),

    #[error("non-finite loss at training step {step}")]
    NonFiniteLoss { step: usize },

    #[error("non-finite gradient entry at index {index}")]
    NonFiniteGradient { index: usize },

    #[error("degenerate design matrix: {0}")]
    DegenerateDesign(String),

    #[error("ill-typed projection path: {0}")]
    IllTypedPath(String),

    #[error("unsupported {what} format version {found} (expected {expected})")]
    VersionMismatch {
        what: &'static str,
        expected: u32,
        found: u32,
    },

    #[error("malformed {what}: {detail}")]
    Malformed { what: &'static str, detail: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl L2cdsError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        L2cdsError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(what: &'static str, detail: impl ToString) -> Self {
        L2cdsError::Malformed {
            what,
            detail: detail.to_string(),
        }
    }
}

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(L2cdsError::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}
