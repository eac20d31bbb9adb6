//! Task decomposition and per-element relevance scoring.

mod backend;
mod engine;
mod lexical;
pub mod prompt;
pub mod protocol;
mod remote;
mod replay;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dom::NodeId;

pub use backend::{
    BackendError, Capabilities, CallCounts, MeteredBackend, RequestKind, ScorerBackend, ScorerRequest,
};
pub use engine::{
    combine_image_score, decompose_task, label_and_score_icons, scale_similarity, score_image, score_images,
    score_iframes, score_text_batches,
};
pub use lexical::{lexical_score, LexicalBackend};
pub use remote::{RemoteBackend, RemoteConfig};
pub use replay::{RecordedReply, RecordingBackend, ReplayBackend};

/// Five-part decomposition of a user task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskBreakdown {
    pub entity: String,
    pub constraints: Vec<String>,
    pub actions: Vec<String>,
    #[serde(rename = "default")]
    pub defaults: Vec<String>,
    #[serde(rename = "fallback")]
    pub fallbacks: Vec<String>,
}

impl TaskBreakdown {
    /// Breakdown with only an entity.
    pub fn entity_only(entity: impl Into<String>) -> Self {
        Self {
            entity: entity.into(),
            constraints: Vec::new(),
            actions: Vec::new(),
            defaults: Vec::new(),
            fallbacks: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("breakdown serializes")
    }
}

/// A task together with its decomposition; everything the prompts need.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskContext {
    pub task: String,
    pub breakdown: TaskBreakdown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Text,
    Alt,
    ImageEmbedding,
    CombinedImage,
    Icon,
    IframeTitle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Score {
    pub score: u8,
    pub channel: Channel,
}

/// Element id to score. Iteration order is by id, so serialized maps are
/// stable regardless of how batches were scheduled.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScoreMap {
    entries: BTreeMap<NodeId, Score>,
}

impl ScoreMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: NodeId, score: u8, channel: Channel) -> Result<(), ScoringError> {
        if score > 100 {
            return Err(ScoringError::ScoreOutOfRange(id, score));
        }
        if self.entries.contains_key(&id) {
            return Err(ScoringError::DuplicateScore(id));
        }
        self.entries.insert(id, Score { score, channel });
        Ok(())
    }

    pub fn extend(&mut self, entries: impl IntoIterator<Item = (NodeId, Score)>) -> Result<(), ScoringError> {
        for (id, s) in entries {
            self.insert(id, s.score, s.channel)?;
        }
        Ok(())
    }

    pub fn get(&self, id: NodeId) -> Option<u8> {
        self.entries.get(&id).map(|s| s.score)
    }

    pub fn entry(&self, id: NodeId) -> Option<&Score> {
        self.entries.get(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &Score)> {
        self.entries.iter().map(|(id, s)| (*id, s))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoringConfig {
    pub alt_weight: f64,
    pub image_weight: f64,
    /// Score for an image with neither alt text nor an embedding channel.
    pub missing_embedding_default: u8,
    pub batch_size: usize,
    /// Retries after a failed or malformed backend reply.
    pub retry_limit: u32,
    /// Cosine similarity mapped to 0 and 100 respectively.
    pub similarity_range: (f64, f64),
}

impl Default for ScoringConfig {
    fn default() -> Self {
        Self {
            alt_weight: 0.3,
            image_weight: 0.7,
            missing_embedding_default: 0,
            batch_size: 200,
            retry_limit: 1,
            similarity_range: (0.15, 0.40),
        }
    }
}

impl ScoringConfig {
    pub fn validate(&self) -> Result<(), ScoringError> {
        let bad = |msg: &str| Err(ScoringError::InvalidConfig(msg.to_string()));
        if self.alt_weight < 0.0 || self.image_weight < 0.0 {
            return bad("image channel weights must be non-negative");
        }
        if (self.alt_weight + self.image_weight - 1.0).abs() > 1e-9 {
            return bad("alt_weight + image_weight must equal 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if self.missing_embedding_default > 100 {
            return bad("missing_embedding_default must be within 0..=100");
        }
        let (lo, hi) = self.similarity_range;
        if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
            return bad("similarity_range must be increasing");
        }
        Ok(())
    }

    pub(crate) fn batch_size(&self) -> std::num::NonZeroUsize {
        std::num::NonZeroUsize::new(self.batch_size).unwrap_or(std::num::NonZeroUsize::MIN)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoringError {
    #[error("task is empty")]
    EmptyTask,
    #[error("scorer backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("backend does not support {0:?} requests")]
    Unsupported(RequestKind),
    #[error("task breakdown violates schema: {0}")]
    SchemaViolation(String),
    #[error("{kind:?} reply violates protocol: {detail}")]
    BatchProtocolViolation { kind: RequestKind, detail: String },
    #[error("duplicate score for node {0}")]
    DuplicateScore(NodeId),
    #[error("score {1} for node {0} is outside 0..=100")]
    ScoreOutOfRange(NodeId, u8),
    #[error("invalid scoring config: {0}")]
    InvalidConfig(String),
}

impl ScoringError {
    /// Whether repeating the same call later might succeed.
    pub fn is_retryable(&self) -> bool {
        matches!(self, ScoringError::BackendUnavailable(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn breakdown_wire_keys() {
        let b = TaskBreakdown {
            entity: "vanilla greek yogurt".into(),
            constraints: vec!["cheapest".into()],
            actions: vec![],
            defaults: vec!["price".into()],
            fallbacks: vec!["search bar".into()],
        };
        let json = b.to_json();
        assert_eq!(
            json,
            r#"{"entity":"vanilla greek yogurt","constraints":["cheapest"],"actions":[],"default":["price"],"fallback":["search bar"]}"#
        );
    }

    #[test]
    fn score_map_rejects_duplicates_and_range() {
        let mut m = ScoreMap::new();
        m.insert(NodeId(1), 40, Channel::Text).unwrap();
        assert_eq!(m.insert(NodeId(1), 50, Channel::Alt), Err(ScoringError::DuplicateScore(NodeId(1))));
        assert!(m.insert(NodeId(2), 101, Channel::Text).is_err());
        assert_eq!(m.get(NodeId(1)), Some(40));
    }

    #[test]
    fn config_validation() {
        assert!(ScoringConfig::default().validate().is_ok());
        let c = ScoringConfig { alt_weight: 0.5, ..Default::default() };
        assert!(c.validate().is_err());
        let c = ScoringConfig { batch_size: 0, ..Default::default() };
        assert!(c.validate().is_err());
    }
}
