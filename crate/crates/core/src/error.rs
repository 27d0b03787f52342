use scdm_kg::query::QueryError;
use scdm_kg::KgError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error(transparent)]
    Kg(#[from] KgError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{entity}: invalid {field}: {reason}")]
    Invalid {
        entity: String,
        field: String,
        reason: String,
    },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("infeasible configuration: {0}")]
    Infeasible(String),
}

impl CoreError {
    pub(crate) fn invalid(entity: &str, field: &str, reason: impl Into<String>) -> Self {
        CoreError::Invalid {
            entity: entity.to_string(),
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = CoreError> = std::result::Result<T, E>;
