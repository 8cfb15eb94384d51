//! HTTP API used by reviewers to inspect runs and record their verdicts.
//!
//! | method | path                      | body                              |
//! |--------|---------------------------|-----------------------------------|
//! | GET    | `/runs`                   |                                   |
//! | GET    | `/runs/{id}`              |                                   |
//! | POST   | `/runs/{id}/verdicts`     | `{item_id, outcome, reviewer}`    |
//! | POST   | `/runs/{id}/syntax-flag`  | `{reviewer, flag}`                |
//! | GET    | `/report`                 |                                   |
//!
//! Each verdict can be overridden once. Writes re-score the run and refresh
//! `reports/all.*`.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use pdag_core::eval::{Outcome, ResolveError, SyntaxFlags};
use pdag_core::prompt::{AbstractionCategory, ShotMode};
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;

use crate::manifest::Corpus;
use crate::record::RunRecord;
use crate::runner::{report, ReportError};
use crate::store::{Store, StoreError};

#[derive(Clone)]
struct AppState {
    store: Store,
    corpus: Option<Arc<Corpus>>,
    writes: Arc<Mutex<()>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: String,
    pub benchmark: String,
    pub category: AbstractionCategory,
    pub shot: ShotMode,
    pub run_index: u32,
    pub cn: f64,
    pub auc: f64,
    pub pending: usize,
    pub syntax_flags: SyntaxFlags,
}

impl From<&RunRecord> for RunSummary {
    fn from(r: &RunRecord) -> Self {
        RunSummary {
            run_id: r.run_id.clone(),
            benchmark: r.benchmark.clone(),
            category: r.category,
            shot: r.shot,
            run_index: r.run_index,
            cn: r.score.cn,
            auc: r.score.auc,
            pending: r.pending(),
            syntax_flags: r.score.syntax_flags,
        }
    }
}

/// The texts a reviewer compares side by side.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Texts {
    pub ll_domain: String,
    pub ll_problem: String,
    pub reference_hl_domain: String,
    pub reference_hl_problem: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDetail {
    pub record: RunRecord,
    /// Absent when the benchmark is not in the loaded corpus.
    pub texts: Option<Texts>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct VerdictBody {
    pub item_id: String,
    pub outcome: Outcome,
    pub reviewer: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SyntaxFlagBody {
    pub reviewer: String,
    #[serde(default = "yes")]
    pub flag: bool,
}

fn yes() -> bool {
    true
}

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(serde_json::json!({ "error": self.1 }))).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let code = match e {
            StoreError::NotFound(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(code, e.to_string())
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

async fn list(State(s): State<AppState>) -> ApiResult<Vec<RunSummary>> {
    Ok(Json(s.store.list_runs()?.iter().map(RunSummary::from).collect()))
}

async fn detail(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<RunDetail> {
    let record = s.store.load_run(&id)?;
    let texts = s.corpus.as_ref().and_then(|c| c.get(&record.benchmark)).map(|b| Texts {
        ll_domain: b.ll_domain_text.clone(),
        ll_problem: b.ll_problem_text.clone(),
        reference_hl_domain: b.hl_domain_text.clone(),
        reference_hl_problem: b.hl_problem_text.clone(),
    });
    Ok(Json(RunDetail { record, texts }))
}

fn reviewer(name: &str) -> Result<(), ApiError> {
    if name.trim().is_empty() {
        Err(ApiError(StatusCode::UNPROCESSABLE_ENTITY, "a reviewer id is required".into()))
    } else {
        Ok(())
    }
}

fn refresh_report(store: &Store) -> Result<(), ApiError> {
    match report(store, None) {
        Ok(_) | Err(ReportError::NoRuns(_)) => Ok(()),
        Err(ReportError::Store(e)) => Err(e.into()),
    }
}

async fn set_verdict(
    State(s): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<VerdictBody>,
) -> ApiResult<RunSummary> {
    reviewer(&body.reviewer)?;
    let _w = s.writes.lock().await;
    let mut r = s.store.load_run(&id)?;
    let v = r
        .verdicts
        .iter_mut()
        .find(|v| v.item_id == body.item_id)
        .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("run {id} has no item `{}`", body.item_id)))?;
    v.resolve(body.outcome, body.reviewer.trim()).map_err(|e| match e {
        ResolveError::AlreadyResolved(..) => ApiError(StatusCode::CONFLICT, e.to_string()),
        ResolveError::Undecided => ApiError(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()),
    })?;
    r.rescore();
    s.store.update_run(&r)?;
    refresh_report(&s.store)?;
    Ok(Json(RunSummary::from(&r)))
}

async fn set_syntax_flag(
    State(s): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<SyntaxFlagBody>,
) -> ApiResult<RunSummary> {
    reviewer(&body.reviewer)?;
    let _w = s.writes.lock().await;
    let mut r = s.store.load_run(&id)?;
    r.human_syntax_flag = body.flag;
    r.rescore();
    s.store.update_run(&r)?;
    refresh_report(&s.store)?;
    Ok(Json(RunSummary::from(&r)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportBody {
    pub table: String,
    pub csv: String,
}

async fn get_report(State(s): State<AppState>) -> Result<Json<ReportBody>, ApiError> {
    match report(&s.store, None) {
        Ok(r) => Ok(Json(ReportBody { table: r.table, csv: r.csv })),
        Err(ReportError::NoRuns(_)) => Err(ApiError(StatusCode::NOT_FOUND, "the store holds no runs".into())),
        Err(ReportError::Store(e)) => Err(e.into()),
    }
}

pub fn router(store: Store, corpus: Option<Arc<Corpus>>) -> Router {
    let state = AppState { store, corpus, writes: Arc::new(Mutex::new(())) };
    Router::new()
        .route("/runs", get(list))
        .route("/runs/{id}", get(detail))
        .route("/runs/{id}/verdicts", post(set_verdict))
        .route("/runs/{id}/syntax-flag", post(set_syntax_flag))
        .route("/report", get(get_report))
        .with_state(state)
}

/// Serves the API on localhost until the process is interrupted.
pub async fn serve_review(port: u16, store: Store, corpus: Option<Arc<Corpus>>) -> std::io::Result<()> {
    let addr = SocketAddr::from(([127, 0, 0, 1], port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("review API listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(store, corpus))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
