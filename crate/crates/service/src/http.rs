//! JSON over HTTP.

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use tm_core::rendering::RenderMode;
use tracing::warn;

use crate::error::ServiceError;
use crate::state::Service;

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.http_status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self.body())).into_response()
    }
}

#[derive(Debug, Deserialize)]
pub struct TaskBody {
    pub task: String,
}

#[derive(Debug, Deserialize)]
pub struct PageBody {
    pub url: String,
    pub html: String,
}

#[derive(Debug, Deserialize)]
pub struct RenderQuery {
    pub mode: Option<String>,
    pub threshold: Option<String>,
}

pub fn router(service: Service) -> Router {
    Router::new()
        .route("/v1/sessions", post(create_session))
        .route("/v1/sessions/{id}", get(get_session))
        .route("/v1/sessions/{id}/pages", post(submit_page))
        .route("/v1/sessions/{id}/task", post(update_task))
        .route("/v1/sessions/{id}/complete", post(complete_session))
        .route("/v1/pages/{pid}", get(get_page))
        .route("/v1/pages/{pid}/render", get(get_render))
        .with_state(service)
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static,
) -> Result<T, ServiceError> {
    tokio::task::spawn_blocking(f)
        .await
        .unwrap_or_else(|e| Err(ServiceError::BadRequest(format!("worker failed: {e}"))))
}

async fn create_session(State(svc): State<Service>, Json(body): Json<TaskBody>) -> Response {
    match blocking(move || svc.create_session(&body.task)).await {
        Ok(view) => (StatusCode::CREATED, Json(view)).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn get_session(State(svc): State<Service>, Path(id): Path<String>) -> Response {
    match svc.get_session(&id) {
        Ok(view) => Json(view).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn submit_page(State(svc): State<Service>, Path(id): Path<String>, Json(body): Json<PageBody>) -> Response {
    let page_id = match svc.submit_page(&id, &body.url, body.html) {
        Ok(p) => p,
        Err(e) => return e.into_response(),
    };
    let worker = svc.clone();
    let pid = page_id.clone();
    tokio::task::spawn_blocking(move || {
        if let Err(e) = worker.run_job(&pid) {
            warn!(page = %pid, error = %e, "job could not run");
        }
    });
    match svc.get_job(&page_id) {
        Ok(view) => (StatusCode::ACCEPTED, Json(view)).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn get_page(State(svc): State<Service>, Path(pid): Path<String>) -> Response {
    match svc.get_job(&pid) {
        Ok(view) => Json(view).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn get_render(State(svc): State<Service>, Path(pid): Path<String>, Query(q): Query<RenderQuery>) -> Response {
    let mode = match q.mode.as_deref().filter(|m| !m.is_empty()) {
        None => RenderMode::Gradient,
        Some(m) => match m.parse::<RenderMode>() {
            Ok(mode) => mode,
            Err(e) => return ServiceError::BadRequest(e.to_string()).into_response(),
        },
    };
    let threshold = match q.threshold.as_deref().filter(|t| !t.is_empty()) {
        None => None,
        Some(t) => match t.parse::<u8>() {
            Ok(v) if v <= 100 => Some(v),
            _ => return ServiceError::BadRequest(format!("threshold {t:?} is not an integer in 0..=100")).into_response(),
        },
    };
    match blocking(move || svc.get_render(&pid, mode, threshold)).await {
        Ok(view) => Json(view).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn update_task(State(svc): State<Service>, Path(id): Path<String>, Json(body): Json<TaskBody>) -> Response {
    match blocking(move || svc.update_task(&id, &body.task)).await {
        Ok(view) => Json(view).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn complete_session(State(svc): State<Service>, Path(id): Path<String>) -> Response {
    match svc.complete_session(&id) {
        Ok(stats) => Json(stats).into_response(),
        Err(e) => e.into_response(),
    }
}
