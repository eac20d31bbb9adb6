use serde::{Deserialize, Serialize};
use thiserror::Error;
use tm_core::dom::DomError;
use tm_core::scoring::ScoringError;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("unknown page {0}")]
    UnknownPage(String),
    #[error("session {0} is completed")]
    SessionCompleted(String),
    #[error("page {0} is still processing")]
    JobNotDone(String),
    #[error("no scores for this page; resubmit it")]
    MissingScores,
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error(transparent)]
    Scoring(ScoringError),
    #[error(transparent)]
    Dom(DomError),
    #[error("log store: {0}")]
    Log(String),
}

impl From<ScoringError> for ServiceError {
    fn from(e: ScoringError) -> Self {
        ServiceError::Scoring(e)
    }
}

/// Wire form of every error response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    pub retryable: bool,
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownSession(_) => "UnknownSession",
            ServiceError::UnknownPage(_) => "UnknownPage",
            ServiceError::SessionCompleted(_) => "SessionCompleted",
            ServiceError::JobNotDone(_) => "JobNotDone",
            ServiceError::MissingScores => "MissingScores",
            ServiceError::BadRequest(_) => "BadRequest",
            ServiceError::Scoring(e) => match e {
                ScoringError::EmptyTask => "EmptyTask",
                ScoringError::BackendUnavailable(_) => "BackendUnavailable",
                ScoringError::Unsupported(_) => "Unsupported",
                ScoringError::SchemaViolation(_) => "SchemaViolation",
                ScoringError::BatchProtocolViolation { .. } => "BatchProtocolViolation",
                ScoringError::DuplicateScore(_) | ScoringError::ScoreOutOfRange(..) => "ScoreMapInvariant",
                ScoringError::InvalidConfig(_) => "InvalidConfig",
            },
            ServiceError::Dom(e) => match e {
                DomError::EmptyDocument => "EmptyDocument",
                DomError::EncodingError(_) => "EncodingError",
                DomError::DanglingAnnotation(_) => "DanglingAnnotation",
                DomError::MalformedTree(_) => "MalformedTree",
            },
            ServiceError::Log(_) => "LogStore",
        }
    }

    pub fn retryable(&self) -> bool {
        match self {
            ServiceError::Scoring(e) => e.is_retryable(),
            ServiceError::Log(_) | ServiceError::JobNotDone(_) => true,
            _ => false,
        }
    }

    pub fn http_status(&self) -> u16 {
        match self {
            ServiceError::UnknownSession(_) | ServiceError::UnknownPage(_) => 404,
            ServiceError::SessionCompleted(_) | ServiceError::JobNotDone(_) | ServiceError::MissingScores => 409,
            ServiceError::BadRequest(_) | ServiceError::Dom(_) => 400,
            ServiceError::Scoring(ScoringError::EmptyTask) => 400,
            ServiceError::Scoring(ScoringError::BackendUnavailable(_)) => 503,
            ServiceError::Scoring(ScoringError::SchemaViolation(_) | ScoringError::BatchProtocolViolation { .. }) => 502,
            ServiceError::Scoring(_) | ServiceError::Log(_) => 500,
        }
    }

    pub fn body(&self) -> ErrorBody {
        ErrorBody { code: self.code().into(), message: self.to_string(), retryable: self.retryable() }
    }
}
