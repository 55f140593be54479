//! Error type shared across the toolkit, with a stable mapping to CLI exit
//! codes.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = RisError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum RisError {
    /// Scene fields violate an invariant (degenerate normal, bad lattice...).
    #[error("invalid scene: {0}")]
    InvalidScene(String),

    /// Two points coincide where a strictly positive distance is required.
    #[error("singular geometry: {0}")]
    SingularGeometry(String),

    /// Vector/matrix lengths do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An argument is outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A requested construction exceeds the dense-matrix capacity budget.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// The OMP support became rank deficient.
    #[error("singular support at OMP iteration {iteration}")]
    SingularSupport { iteration: usize },

    /// An estimator received a sensing matrix kind it cannot use.
    #[error("unsupported sensing matrix: {0}")]
    UnsupportedMatrix(String),

    /// Scenario/config file violates the schema.
    #[error("schema error in {path}: {message}")]
    Schema { path: String, message: String },

    /// A text data file failed to parse; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A power probe failed during iterative optimization.
    #[error("probe failed at element {element}: {source}")]
    Probe {
        element: usize,
        #[source]
        source: Box<RisError>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RisError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RisError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code contract: 0 success, 2 config/schema, 3 capacity,
    /// 4 numeric failure, 5 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            RisError::InvalidScene(_)
            | RisError::DimensionMismatch(_)
            | RisError::Domain(_)
            | RisError::UnsupportedMatrix(_)
            | RisError::Schema { .. }
            | RisError::Parse { .. } => 2,
            RisError::Capacity(_) => 3,
            RisError::SingularGeometry(_) | RisError::SingularSupport { .. } => 4,
            RisError::Probe { source, .. } => source.exit_code(),
            RisError::Io { .. } => 5,
        }
    }
}
