use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller violated a precondition (bad dimensions, s > m, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// Every centroid slot is Degenerate, so nothing can be assigned.
    #[error("invalid solution: all {k} centroid slots are degenerate")]
    InvalidSolution { k: usize },

    /// All sample points coincide with the fixed centers; no K-means++ mass left.
    #[error("degenerate sample: all {sample_size} points have zero distance to the fixed centers")]
    DegenerateSample { sample_size: usize },

    #[error("seeding error: need {k} distinct points, found only {found}")]
    Seeding { k: usize, found: usize },

    #[error("shaking error: neighborhood {index} is empty")]
    Shaking { index: usize },

    #[error("clustering failed: {0}")]
    ClusteringFailure(String),

    #[error("ingestion error in {path} at row {row}, column {column}: {message}")]
    Ingestion {
        path: PathBuf,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("spec error at line {line}: {message}")]
    SpecFormat { line: usize, message: String },

    #[error("aggregation error: missing cells {missing:?}")]
    Aggregation { missing: Vec<String> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    /// Process exit code used by the CLI: 1 usage, 2 data, 3 run failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::SpecFormat { .. } => 1,
            Error::Ingestion { .. } | Error::Io(_) | Error::Csv(_) => 2,
            Error::InvalidSolution { .. }
            | Error::DegenerateSample { .. }
            | Error::Seeding { .. }
            | Error::Shaking { .. }
            | Error::ClusteringFailure(_)
            | Error::Aggregation { .. } => 3,
        }
    }
}
