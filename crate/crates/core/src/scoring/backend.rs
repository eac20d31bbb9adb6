use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{prompt, TaskContext};
use crate::dom::ScoringBatchItem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestKind {
    Breakdown,
    TextBatch,
    AltBatch,
    SvgLabels,
    IconBatch,
    ImageSimilarity,
}

/// One call to a scorer backend. Every variant renders to a prompt, which is
/// also what identifies the request for recording and replay.
#[derive(Debug, Clone, Copy)]
pub enum ScorerRequest<'a> {
    Breakdown { task: &'a str },
    TextBatch { context: &'a TaskContext, items: &'a [ScoringBatchItem] },
    AltBatch { context: &'a TaskContext, alts: &'a [String] },
    SvgLabels { paths: &'a [String] },
    IconBatch { context: &'a TaskContext, labels: &'a [String] },
    ImageSimilarity { task: &'a str, source: &'a str },
}

impl ScorerRequest<'_> {
    pub fn kind(&self) -> RequestKind {
        match self {
            ScorerRequest::Breakdown { .. } => RequestKind::Breakdown,
            ScorerRequest::TextBatch { .. } => RequestKind::TextBatch,
            ScorerRequest::AltBatch { .. } => RequestKind::AltBatch,
            ScorerRequest::SvgLabels { .. } => RequestKind::SvgLabels,
            ScorerRequest::IconBatch { .. } => RequestKind::IconBatch,
            ScorerRequest::ImageSimilarity { .. } => RequestKind::ImageSimilarity,
        }
    }

    /// Number of values a batch reply must contain.
    pub fn expected_len(&self) -> usize {
        match self {
            ScorerRequest::TextBatch { items, .. } => items.len(),
            ScorerRequest::AltBatch { alts, .. } => alts.len(),
            ScorerRequest::SvgLabels { paths } => paths.len(),
            ScorerRequest::IconBatch { labels, .. } => labels.len(),
            ScorerRequest::Breakdown { .. } | ScorerRequest::ImageSimilarity { .. } => 1,
        }
    }

    pub fn prompt(&self) -> String {
        match *self {
            ScorerRequest::Breakdown { task } => prompt::breakdown(task),
            ScorerRequest::TextBatch { context, items } => prompt::text_batch(context, items),
            ScorerRequest::AltBatch { context, alts } => prompt::alt_batch(context, alts),
            ScorerRequest::SvgLabels { paths } => prompt::svg_labels(paths),
            ScorerRequest::IconBatch { context, labels } => prompt::icon_batch(context, labels),
            ScorerRequest::ImageSimilarity { task, source } => prompt::image_similarity(task, source),
        }
    }

    /// Hex SHA-256 of the request kind and rendered prompt.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(format!("{:?}", self.kind()).as_bytes());
        hasher.update([0]);
        hasher.update(self.prompt().as_bytes());
        hex::encode(hasher.finalize())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capabilities {
    pub breakdown: bool,
    pub text_batch: bool,
    pub alt_batch: bool,
    pub svg_label_batch: bool,
    pub icon_batch: bool,
    pub image_embedding: bool,
}

impl Capabilities {
    pub const ALL: Capabilities = Capabilities {
        breakdown: true,
        text_batch: true,
        alt_batch: true,
        svg_label_batch: true,
        icon_batch: true,
        image_embedding: true,
    };

    pub fn supports(&self, kind: RequestKind) -> bool {
        match kind {
            RequestKind::Breakdown => self.breakdown,
            RequestKind::TextBatch => self.text_batch,
            RequestKind::AltBatch => self.alt_batch,
            RequestKind::SvgLabels => self.svg_label_batch,
            RequestKind::IconBatch => self.icon_batch,
            RequestKind::ImageSimilarity => self.image_embedding,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BackendError {
    /// Transport failure or server-side error; worth retrying.
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    #[error("backend does not support {0:?}")]
    Unsupported(RequestKind),
    #[error("backend rejected request: {0}")]
    Rejected(String),
}

/// A relevance scorer. Replies are raw text; the engine validates them.
///
/// Implementations must be callable from several threads at once.
pub trait ScorerBackend: Send + Sync {
    fn capabilities(&self) -> Capabilities;

    fn complete(&self, request: &ScorerRequest<'_>) -> Result<String, BackendError>;
}

impl<B: ScorerBackend + ?Sized> ScorerBackend for &B {
    fn capabilities(&self) -> Capabilities {
        (**self).capabilities()
    }

    fn complete(&self, request: &ScorerRequest<'_>) -> Result<String, BackendError> {
        (**self).complete(request)
    }
}

impl<B: ScorerBackend + ?Sized> ScorerBackend for Box<B> {
    fn capabilities(&self) -> Capabilities {
        (**self).capabilities()
    }

    fn complete(&self, request: &ScorerRequest<'_>) -> Result<String, BackendError> {
        (**self).complete(request)
    }
}

impl<B: ScorerBackend + ?Sized> ScorerBackend for std::sync::Arc<B> {
    fn capabilities(&self) -> Capabilities {
        (**self).capabilities()
    }

    fn complete(&self, request: &ScorerRequest<'_>) -> Result<String, BackendError> {
        (**self).complete(request)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallCounts {
    pub calls: u64,
    pub prompt_chars: u64,
    pub reply_chars: u64,
}

impl CallCounts {
    /// Rough token estimate: one token per four characters, rounded up.
    pub fn input_tokens_est(&self) -> u64 {
        self.prompt_chars.div_ceil(4)
    }

    pub fn output_tokens_est(&self) -> u64 {
        self.reply_chars.div_ceil(4)
    }
}

/// Counts calls and prompt/reply sizes passing through a backend.
pub struct MeteredBackend<B> {
    inner: B,
    calls: AtomicU64,
    prompt_chars: AtomicU64,
    reply_chars: AtomicU64,
}

impl<B: ScorerBackend> MeteredBackend<B> {
    pub fn new(inner: B) -> Self {
        Self {
            inner,
            calls: AtomicU64::new(0),
            prompt_chars: AtomicU64::new(0),
            reply_chars: AtomicU64::new(0),
        }
    }

    pub fn counts(&self) -> CallCounts {
        CallCounts {
            calls: self.calls.load(Ordering::SeqCst),
            prompt_chars: self.prompt_chars.load(Ordering::SeqCst),
            reply_chars: self.reply_chars.load(Ordering::SeqCst),
        }
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }
}

impl<B: ScorerBackend> ScorerBackend for MeteredBackend<B> {
    fn capabilities(&self) -> Capabilities {
        self.inner.capabilities()
    }

    fn complete(&self, request: &ScorerRequest<'_>) -> Result<String, BackendError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.prompt_chars
            .fetch_add(request.prompt().chars().count() as u64, Ordering::SeqCst);
        let reply = self.inner.complete(request)?;
        self.reply_chars.fetch_add(reply.chars().count() as u64, Ordering::SeqCst);
        Ok(reply)
    }
}
