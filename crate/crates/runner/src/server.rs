//! JSON API over [`SessionService`], with an optional static UI bundle.

use std::path::Path;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use tower_http::services::ServeDir;

use crate::sessions::{
    CreateSession, FeedbackMode, SessionError, SessionService, SolveSession, StoredSubmission,
    SubmitRequest,
};

pub struct ApiError(SessionError);

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        ApiError(e)
    }
}

impl ApiError {
    fn status_and_code(&self) -> (StatusCode, &'static str) {
        match &self.0 {
            SessionError::UnknownSession(_) => (StatusCode::NOT_FOUND, "unknown_session"),
            SessionError::UnknownPuzzle(_) => (StatusCode::NOT_FOUND, "unknown_puzzle"),
            SessionError::NotSubmitted(_) => (StatusCode::NOT_FOUND, "not_submitted"),
            SessionError::DuplicateSubmission { .. } => (StatusCode::CONFLICT, "duplicate_submission"),
            SessionError::Malformed(_) => (StatusCode::UNPROCESSABLE_ENTITY, "malformed"),
            SessionError::PairConflict { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "pair_conflict"),
            SessionError::FeedbackWithheld => (StatusCode::FORBIDDEN, "feedback_withheld"),
            SessionError::Store { .. } => (StatusCode::INTERNAL_SERVER_ERROR, "store_error"),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code) = self.status_and_code();
        if status.is_server_error() {
            tracing::error!("{}", self.0);
        }
        (status, Json(json!({"error": {"code": code, "message": self.0.to_string()}}))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;
type Service = Arc<SessionService>;

/// Any body that is not valid JSON of the expected shape is a 422.
fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError(SessionError::Malformed(e.to_string())))
}

/// Submission receipt: never includes the report.
fn receipt(s: &StoredSubmission) -> Value {
    json!({
        "puzzle_id": s.puzzle_id,
        "submitted_at": s.submitted_at,
        "started_at": s.started_at,
    })
}

fn submission_view(mode: FeedbackMode, s: &StoredSubmission) -> Value {
    let mut v = receipt(s);
    if mode == FeedbackMode::AfterSubmit {
        v["report"] = serde_json::to_value(&s.report).expect("report serializes");
    }
    v
}

fn session_view(s: &SolveSession) -> Value {
    json!({
        "session_id": s.session_id,
        "solver_display_name": s.solver_display_name,
        "puzzle_ids": s.puzzle_ids,
        "feedback_mode": s.feedback_mode,
        "created_at": s.created_at,
        "submissions": s.submissions.values().map(|x| submission_view(s.feedback_mode, x)).collect::<Vec<_>>(),
    })
}

#[derive(Serialize)]
struct SessionSummary<'a> {
    session_id: &'a str,
    solver_display_name: &'a str,
    feedback_mode: FeedbackMode,
    created_at: chrono::DateTime<chrono::Utc>,
    n_puzzles: usize,
    n_submitted: usize,
}

async fn list_sessions(State(svc): State<Service>) -> Json<Value> {
    let snap = svc.snapshot();
    let list: Vec<SessionSummary> = snap
        .values()
        .map(|s| SessionSummary {
            session_id: &s.session_id,
            solver_display_name: &s.solver_display_name,
            feedback_mode: s.feedback_mode,
            created_at: s.created_at,
            n_puzzles: s.puzzle_ids.len(),
            n_submitted: s.submissions.len(),
        })
        .collect();
    Json(json!({ "sessions": list }))
}

async fn list_puzzles(State(svc): State<Service>) -> Json<Value> {
    Json(json!({ "puzzle_ids": svc.puzzle_ids() }))
}

async fn create_session(State(svc): State<Service>, body: Bytes) -> ApiResult<(StatusCode, Json<Value>)> {
    let req: CreateSession = parse_body(&body)?;
    let s = svc.create(req)?;
    Ok((StatusCode::CREATED, Json(session_view(&s))))
}

async fn get_session(State(svc): State<Service>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    let s = svc.session(&id)?;
    Ok(Json(session_view(&s)))
}

async fn get_puzzle(
    State(svc): State<Service>,
    UrlPath((id, pid)): UrlPath<(String, String)>,
) -> ApiResult<Json<Value>> {
    let p = svc.presentation(&id, &pid)?;
    Ok(Json(serde_json::to_value(p).expect("presentation serializes")))
}

async fn submit(
    State(svc): State<Service>,
    UrlPath((id, pid)): UrlPath<(String, String)>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let req: SubmitRequest = parse_body(&body)?;
    let stored = svc.submit(&id, &pid, req)?;
    let mode = svc.session(&id)?.feedback_mode;
    Ok((StatusCode::CREATED, Json(submission_view(mode, &stored))))
}

async fn get_result(
    State(svc): State<Service>,
    UrlPath((id, pid)): UrlPath<(String, String)>,
) -> ApiResult<Json<Value>> {
    let report = svc.result(&id, &pid)?;
    Ok(Json(serde_json::to_value(report).expect("report serializes")))
}

pub fn router(svc: Service, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/puzzles", get(list_puzzles))
        .route("/sessions", get(list_sessions).post(create_session))
        .route("/sessions/:id", get(get_session))
        .route("/sessions/:id/puzzles/:pid", get(get_puzzle))
        .route("/sessions/:id/puzzles/:pid/submission", post(submit))
        .route("/sessions/:id/puzzles/:pid/result", get(get_result))
        .with_state(svc);
    let app = Router::new().nest("/api", api);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

pub async fn serve(svc: Service, bind: std::net::SocketAddr, static_dir: Option<&Path>) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    tracing::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(svc, static_dir))
        .with_graceful_shutdown(async {
            tokio::signal::ctrl_c().await.ok();
        })
        .await?;
    Ok(())
}
