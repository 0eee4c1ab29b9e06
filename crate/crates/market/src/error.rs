use thiserror::Error;

use crate::types::{AgentId, SimTime};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("event scheduled at {at} but kernel time is already {now}")]
    ScheduleInPast { at: SimTime, now: SimTime },
    #[error("unknown agent {0}")]
    UnknownAgent(AgentId),
    #[error("invalid config `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("{file}: row {row}: {reason}")]
    Data {
        file: String,
        row: usize,
        reason: String,
    },
    #[error("fundamental series: {0}")]
    Fundamental(String),
    #[error("dataset: {0}")]
    Dataset(String),
    #[error(transparent)]
    Numeric(#[from] lob_arena_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;

pub(crate) fn config_err(field: impl Into<String>, reason: impl Into<String>) -> SimError {
    SimError::Config {
        field: field.into(),
        reason: reason.into(),
    }
}
