//! Sessions, page jobs and the score cache, independent of transport.
//!
//! Each session is guarded by its own mutex, which is held across task
//! updates and across the final step of a page job (generation check, cache
//! insert, log append). A job scored under an older task therefore can never
//! reach the cache after the task changed.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};
use tm_core::cache::{PageKey, ScoreCache};
use tm_core::dom::{serialize, DomError, ParseOptions};
use tm_core::pipeline::{analyze_page, PageStats, PipelineError};
use tm_core::rendering::{RenderConfig, RenderError, RenderMode};
use tm_core::scoring::{
    decompose_task, MeteredBackend, ScoreMap, ScorerBackend, ScoringConfig, ScoringError, TaskBreakdown, TaskContext,
};
use tracing::{info, warn};

use crate::error::{ErrorBody, ServiceError};
use crate::log::{ElementCounts, LogStore, SessionRecord};

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionStatus {
    Active,
    Completed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Queued,
    Processing,
    Done,
    Error,
}

#[derive(Debug)]
struct Session {
    task: String,
    context: TaskContext,
    created_at_ms: u64,
    updated_at_ms: u64,
    status: SessionStatus,
    /// Bumped on every task update.
    generation: u64,
    pages: Vec<String>,
}

#[derive(Debug)]
struct PageJob {
    session_id: String,
    url: String,
    generation: u64,
    context: TaskContext,
    html: Option<String>,
    status: JobStatus,
    error: Option<ErrorBody>,
    stats: Option<PageStats>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub task: String,
    pub breakdown: TaskBreakdown,
    pub status: SessionStatus,
    pub created_at_ms: u64,
    pub updated_at_ms: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JobView {
    pub page_id: String,
    pub session_id: String,
    pub url: String,
    pub status: JobStatus,
    pub error: Option<ErrorBody>,
    pub stats: Option<PageStats>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RenderView {
    pub page_id: String,
    pub mode: RenderMode,
    pub threshold: u8,
    pub hidden_count: usize,
    pub html: String,
    pub scores: ScoreMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionStats {
    pub session_id: String,
    pub pages: usize,
    pub mean_latency_ms: f64,
}

struct Inner {
    backend: MeteredBackend<Arc<dyn ScorerBackend>>,
    scoring: ScoringConfig,
    parse: ParseOptions,
    render_defaults: RenderConfig,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    jobs: RwLock<HashMap<String, Arc<Mutex<PageJob>>>>,
    cache: ScoreCache,
    log: Arc<dyn LogStore>,
}

/// Cheap to clone; all clones share state.
#[derive(Clone)]
pub struct Service {
    inner: Arc<Inner>,
}

impl Service {
    pub fn new(backend: Arc<dyn ScorerBackend>, scoring: ScoringConfig, log: Arc<dyn LogStore>) -> Self {
        Self {
            inner: Arc::new(Inner {
                backend: MeteredBackend::new(backend),
                scoring,
                parse: ParseOptions::default(),
                render_defaults: RenderConfig::default(),
                sessions: RwLock::default(),
                jobs: RwLock::default(),
                cache: ScoreCache::new(),
                log,
            }),
        }
    }

    pub fn with_render_defaults(self, render_defaults: RenderConfig) -> Self {
        let inner = Arc::try_unwrap(self.inner).unwrap_or_else(|_| panic!("configure before sharing"));
        Self { inner: Arc::new(Inner { render_defaults, ..inner }) }
    }

    /// Scorer calls made so far, across all sessions.
    pub fn backend_calls(&self) -> u64 {
        self.inner.backend.counts().calls
    }

    pub fn log(&self) -> &Arc<dyn LogStore> {
        &self.inner.log
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ServiceError> {
        self.inner.sessions.read().get(id).cloned().ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    fn job(&self, id: &str) -> Result<Arc<Mutex<PageJob>>, ServiceError> {
        self.inner.jobs.read().get(id).cloned().ok_or_else(|| ServiceError::UnknownPage(id.to_string()))
    }

    fn decompose(&self, task: &str) -> Result<TaskContext, ServiceError> {
        if task.trim().is_empty() {
            return Err(ServiceError::Scoring(ScoringError::EmptyTask));
        }
        Ok(decompose_task(task, &self.inner.backend, &self.inner.scoring)?)
    }

    /// Blocks on the scorer backend.
    pub fn create_session(&self, task: &str) -> Result<SessionView, ServiceError> {
        let context = self.decompose(task)?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        let now = now_ms();
        let session = Session {
            task: context.task.clone(),
            context,
            created_at_ms: now,
            updated_at_ms: now,
            status: SessionStatus::Active,
            generation: 0,
            pages: Vec::new(),
        };
        let view = view_of(&id, &session);
        self.inner.sessions.write().insert(id.clone(), Arc::new(Mutex::new(session)));
        info!(session = %id, "session created");
        Ok(view)
    }

    pub fn get_session(&self, id: &str) -> Result<SessionView, ServiceError> {
        let session = self.session(id)?;
        let s = session.lock();
        Ok(view_of(id, &s))
    }

    /// Queues a page; call [`Service::run_job`] to process it.
    pub fn submit_page(&self, session_id: &str, url: &str, html: String) -> Result<String, ServiceError> {
        let session = self.session(session_id)?;
        let mut s = session.lock();
        if s.status == SessionStatus::Completed {
            return Err(ServiceError::SessionCompleted(session_id.to_string()));
        }
        let page_id = uuid::Uuid::new_v4().simple().to_string();
        let job = PageJob {
            session_id: session_id.to_string(),
            url: url.to_string(),
            generation: s.generation,
            context: s.context.clone(),
            html: Some(html),
            status: JobStatus::Queued,
            error: None,
            stats: None,
        };
        s.pages.push(page_id.clone());
        self.inner.jobs.write().insert(page_id.clone(), Arc::new(Mutex::new(job)));
        Ok(page_id)
    }

    /// Processes a queued job to completion. Blocks on the scorer backend.
    pub fn run_job(&self, page_id: &str) -> Result<JobStatus, ServiceError> {
        let job = self.job(page_id)?;
        let (html, context, session_id, generation, url) = {
            let mut j = job.lock();
            if j.status != JobStatus::Queued {
                return Ok(j.status);
            }
            j.status = JobStatus::Processing;
            (j.html.take().unwrap_or_default(), j.context.clone(), j.session_id.clone(), j.generation, j.url.clone())
        };

        let outcome = analyze_page(html.as_bytes(), &context, &self.inner.backend, &self.inner.scoring, &self.inner.parse);
        let session = self.session(&session_id)?;
        let s = session.lock();
        let mut j = job.lock();
        match outcome {
            Err(e) => {
                warn!(page = %page_id, error = %e, "page job failed");
                j.error = Some(ServiceError::from(e).body());
                j.status = JobStatus::Error;
            }
            Ok(_) if s.generation != generation => {
                j.error = Some(ErrorBody {
                    code: "Superseded".into(),
                    message: "task was updated while this page was processing; resubmit the page".into(),
                    retryable: true,
                });
                j.status = JobStatus::Error;
            }
            Ok(analysis) => {
                let record = SessionRecord {
                    timestamp_ms: now_ms(),
                    session_id: session_id.clone(),
                    page_id: page_id.to_string(),
                    url,
                    task: s.task.clone(),
                    counts: ElementCounts {
                        text: analysis.stats.text_count,
                        image: analysis.stats.image_count,
                        svg: analysis.stats.svg_count,
                        iframe: analysis.stats.iframe_count,
                    },
                    scores: analysis.scores.clone(),
                };
                if let Err(e) = self.inner.log.append(&record) {
                    j.error = Some(ServiceError::Log(e.to_string()).body());
                    j.status = JobStatus::Error;
                } else {
                    let key = PageKey { session: session_id, page: page_id.to_string() };
                    self.inner.cache.insert(key, analysis.tree, analysis.scores);
                    j.stats = Some(analysis.stats);
                    j.status = JobStatus::Done;
                }
            }
        }
        Ok(j.status)
    }

    pub fn get_job(&self, page_id: &str) -> Result<JobView, ServiceError> {
        let job = self.job(page_id)?;
        let j = job.lock();
        Ok(JobView {
            page_id: page_id.to_string(),
            session_id: j.session_id.clone(),
            url: j.url.clone(),
            status: j.status,
            error: j.error.clone(),
            stats: j.stats.clone(),
        })
    }

    /// Renders from cached scores only; never calls the backend.
    pub fn get_render(&self, page_id: &str, mode: RenderMode, threshold: Option<u8>) -> Result<RenderView, ServiceError> {
        let job = self.job(page_id)?;
        let (status, session_id) = {
            let j = job.lock();
            (j.status, j.session_id.clone())
        };
        if matches!(status, JobStatus::Queued | JobStatus::Processing) {
            return Err(ServiceError::JobNotDone(page_id.to_string()));
        }
        let config = RenderConfig {
            mode,
            threshold: threshold.unwrap_or(self.inner.render_defaults.threshold),
            ..self.inner.render_defaults.clone()
        };
        let key = PageKey { session: session_id, page: page_id.to_string() };
        let (annotations, page) = tm_core::rendering::rerender(&self.inner.cache, &key, &config)?;
        let html = serialize(&page.tree, &annotations)?;
        Ok(RenderView {
            page_id: page_id.to_string(),
            mode,
            threshold: config.threshold,
            hidden_count: annotations.hidden_count(),
            html,
            scores: (*page.scores).clone(),
        })
    }

    /// Re-derives the breakdown and drops every cached page of the session,
    /// even when the text is unchanged. Blocks on the scorer backend.
    pub fn update_task(&self, session_id: &str, task: &str) -> Result<SessionView, ServiceError> {
        let session = self.session(session_id)?;
        let mut s = session.lock();
        if s.status == SessionStatus::Completed {
            return Err(ServiceError::SessionCompleted(session_id.to_string()));
        }
        let context = self.decompose(task)?;
        s.task = context.task.clone();
        s.context = context;
        s.generation += 1;
        s.updated_at_ms = now_ms();
        let dropped = self.inner.cache.invalidate_session(session_id);
        info!(session = %session_id, dropped, "task updated");
        Ok(view_of(session_id, &s))
    }

    /// Idempotent.
    pub fn complete_session(&self, session_id: &str) -> Result<CompletionStats, ServiceError> {
        let session = self.session(session_id)?;
        let mut s = session.lock();
        if s.status == SessionStatus::Active {
            s.status = SessionStatus::Completed;
            s.updated_at_ms = now_ms();
        }
        let latencies: Vec<u64> = s
            .pages
            .iter()
            .filter_map(|p| self.job(p).ok())
            .filter_map(|j| {
                let j = j.lock();
                (j.status == JobStatus::Done).then(|| j.stats.as_ref().map(|st| st.latency_ms)).flatten()
            })
            .collect();
        let mean = if latencies.is_empty() {
            0.0
        } else {
            latencies.iter().sum::<u64>() as f64 / latencies.len() as f64
        };
        Ok(CompletionStats { session_id: session_id.to_string(), pages: latencies.len(), mean_latency_ms: mean })
    }
}

fn view_of(id: &str, s: &Session) -> SessionView {
    SessionView {
        session_id: id.to_string(),
        task: s.task.clone(),
        breakdown: s.context.breakdown.clone(),
        status: s.status,
        created_at_ms: s.created_at_ms,
        updated_at_ms: s.updated_at_ms,
    }
}

impl From<PipelineError> for ServiceError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Dom(e) => ServiceError::Dom(e),
            PipelineError::Scoring(e) => ServiceError::Scoring(e),
        }
    }
}

impl From<RenderError> for ServiceError {
    fn from(e: RenderError) -> Self {
        match e {
            RenderError::MissingScores => ServiceError::MissingScores,
            RenderError::InvalidConfig(m) => ServiceError::BadRequest(m),
        }
    }
}

impl From<DomError> for ServiceError {
    fn from(e: DomError) -> Self {
        ServiceError::Dom(e)
    }
}
