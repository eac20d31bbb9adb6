//! Recorded-reply backend.
//!
//! Fixtures are JSON lines, one `{"request": <fingerprint>, "kind": ..., "reply": ...}`
//! object per line, where the fingerprint is [`ScorerRequest::fingerprint`].

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::Path;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use super::backend::{BackendError, Capabilities, RequestKind, ScorerBackend, ScorerRequest};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordedReply {
    pub request: String,
    pub kind: RequestKind,
    pub reply: String,
}

#[derive(Debug, Clone, Default)]
pub struct ReplayBackend {
    replies: HashMap<String, String>,
    kinds: Vec<RequestKind>,
}

impl ReplayBackend {
    pub fn from_records(records: impl IntoIterator<Item = RecordedReply>) -> Self {
        let mut backend = Self::default();
        for r in records {
            if !backend.kinds.contains(&r.kind) {
                backend.kinds.push(r.kind);
            }
            backend.replies.insert(r.request, r.reply);
        }
        backend
    }

    /// Parses JSONL text; blank lines are skipped.
    pub fn parse_jsonl(text: &str) -> Result<Self, String> {
        let mut records = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: RecordedReply =
                serde_json::from_str(line).map_err(|e| format!("line {}: {e}", n + 1))?;
            records.push(record);
        }
        Ok(Self::from_records(records))
    }

    pub fn from_path(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse_jsonl(&text)
    }

    pub fn len(&self) -> usize {
        self.replies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.replies.is_empty()
    }
}

impl ScorerBackend for ReplayBackend {
    fn capabilities(&self) -> Capabilities {
        Capabilities { image_embedding: self.kinds.contains(&RequestKind::ImageSimilarity), ..Capabilities::ALL }
    }

    fn complete(&self, request: &ScorerRequest<'_>) -> Result<String, BackendError> {
        let key = request.fingerprint();
        self.replies
            .get(&key)
            .cloned()
            .ok_or_else(|| BackendError::Unavailable(format!("no recorded reply for {:?} request {key}", request.kind())))
    }
}

/// Passes requests through to `inner` and keeps every successful reply so
/// they can be written out as a replay fixture.
pub struct RecordingBackend<B> {
    inner: B,
    records: Mutex<BTreeMap<String, RecordedReply>>,
}

impl<B: ScorerBackend> RecordingBackend<B> {
    pub fn new(inner: B) -> Self {
        Self { inner, records: Mutex::new(BTreeMap::new()) }
    }

    /// Records sorted by fingerprint.
    pub fn records(&self) -> Vec<RecordedReply> {
        self.records.lock().values().cloned().collect()
    }

    pub fn write_jsonl(&self, mut out: impl Write) -> std::io::Result<()> {
        for record in self.records() {
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

impl<B: ScorerBackend> ScorerBackend for RecordingBackend<B> {
    fn capabilities(&self) -> Capabilities {
        self.inner.capabilities()
    }

    fn complete(&self, request: &ScorerRequest<'_>) -> Result<String, BackendError> {
        let reply = self.inner.complete(request)?;
        let key = request.fingerprint();
        self.records
            .lock()
            .insert(key.clone(), RecordedReply { request: key, kind: request.kind(), reply: reply.clone() });
        Ok(reply)
    }
}
