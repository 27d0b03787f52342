use std::path::PathBuf;

use scdm_core::CoreError;
use scdm_kg::query::QueryError;
use scdm_kg::KgError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: CoreError },
    #[error("worker pool: {0}")]
    Pool(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 usage, 2 bad input or configuration, 3 failure while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Parse { .. } => 2,
            CliError::Core(e) => core_code(e),
            CliError::Io { .. } | CliError::Pool(_) => 3,
        }
    }
}

fn core_code(e: &CoreError) -> i32 {
    match e {
        CoreError::Config(_)
        | CoreError::Invalid { .. }
        | CoreError::Validation(_)
        | CoreError::NotFound(_)
        | CoreError::Infeasible(_) => 2,
        CoreError::Kg(KgError::Syntax(_) | KgError::InvalidLiteral { .. } | KgError::Structural(_)) => 2,
        CoreError::Query(QueryError::Syntax(_) | QueryError::Unsupported { .. } | QueryError::NotSelect | QueryError::NotInsert) => 2,
        CoreError::Kg(KgError::Audit(_)) | CoreError::Query(QueryError::Invalid(_)) => 3,
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
