//! Append-only session log.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use tm_core::scoring::ScoreMap;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementCounts {
    pub text: usize,
    pub image: usize,
    pub svg: usize,
    pub iframe: usize,
}

/// One processed page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    /// Milliseconds since the Unix epoch.
    pub timestamp_ms: u64,
    pub session_id: String,
    pub page_id: String,
    pub url: String,
    pub task: String,
    pub counts: ElementCounts,
    pub scores: ScoreMap,
}

pub trait LogStore: Send + Sync {
    fn append(&self, record: &SessionRecord) -> io::Result<()>;

    /// Every record in append order.
    fn records(&self) -> io::Result<Vec<SessionRecord>>;
}

#[derive(Debug, Default)]
pub struct MemoryLogStore {
    records: Mutex<Vec<SessionRecord>>,
}

impl MemoryLogStore {
    pub fn new() -> Self {
        Self::default()
    }
}

impl LogStore for MemoryLogStore {
    fn append(&self, record: &SessionRecord) -> io::Result<()> {
        self.records.lock().push(record.clone());
        Ok(())
    }

    fn records(&self) -> io::Result<Vec<SessionRecord>> {
        Ok(self.records.lock().clone())
    }
}

/// One JSON object per line. Each append is a single write of a whole line
/// followed by a flush, under one lock.
#[derive(Debug)]
pub struct JsonlLogStore {
    path: PathBuf,
    file: Mutex<File>,
}

impl JsonlLogStore {
    pub fn open(path: impl AsRef<Path>) -> io::Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Self { path, file: Mutex::new(file) })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl LogStore for JsonlLogStore {
    fn append(&self, record: &SessionRecord) -> io::Result<()> {
        let mut line = serde_json::to_vec(record)?;
        line.push(b'\n');
        let mut file = self.file.lock();
        file.write_all(&line)?;
        file.flush()
    }

    fn records(&self) -> io::Result<Vec<SessionRecord>> {
        let _guard = self.file.lock();
        let reader = BufReader::new(File::open(&self.path)?);
        let mut out = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record = serde_json::from_str(&line)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("line {}: {e}", n + 1)))?;
            out.push(record);
        }
        Ok(out)
    }
}
