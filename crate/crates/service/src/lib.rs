//! Session service: keeps a task across pages, scores submitted pages in
//! the background, caches their scores and serves renders from the cache.

pub mod config;
pub mod error;
pub mod http;
pub mod log;
pub mod state;

pub use config::{ScorerKind, ServiceConfig};
pub use error::{ErrorBody, ServiceError};
pub use http::router;
pub use log::{ElementCounts, JsonlLogStore, LogStore, MemoryLogStore, SessionRecord};
pub use state::{CompletionStats, JobStatus, JobView, RenderView, Service, SessionStatus, SessionView};
