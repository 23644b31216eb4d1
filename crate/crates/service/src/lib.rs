//! HTTP labeling service. Each session runs MASC on its own thread with a
//! person as the oracle; see [`api`] for the wire format.

pub mod api;
pub mod error;
pub mod session;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use masc_core::experiment::{prepare, ExperimentConfig};
use masc_core::synth::Dataset;
use masc_core::PointCloud;

use crate::api::{CreateSession, Created, LabelRequest, LabelResponse, QueryResponse, StateResponse};
pub use crate::error::ApiError;
pub use crate::session::{Phase, Session};

#[derive(Clone, Debug, Default)]
pub struct ServiceConfig {
    /// Used when a create request carries no config text.
    pub default: Option<ExperimentConfig>,
    /// Directory for per-session query logs, appended on every answer.
    pub log_dir: Option<PathBuf>,
}

#[derive(Clone)]
pub struct AppState {
    config: Arc<ServiceConfig>,
    sessions: Arc<RwLock<HashMap<String, Arc<Session>>>>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        Self {
            config: Arc::new(config),
            sessions: Arc::default(),
        }
    }

    fn get(&self, id: &str) -> Result<Arc<Session>, ApiError> {
        self.sessions
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(id.to_string()))
    }

    fn fresh_id(&self) -> String {
        let sessions = self.sessions.read().unwrap_or_else(|p| p.into_inner());
        loop {
            let id = format!("{:016x}", rand::random::<u64>());
            if !sessions.contains_key(&id) {
                return id;
            }
        }
    }

    /// Build the data and field, start the worker and wait for its first
    /// query (or completion).
    pub async fn create(&self, req: CreateSession) -> Result<Arc<Session>, ApiError> {
        let config = match &req.config {
            Some(text) => ExperimentConfig::parse(text, Path::new("request.conf"))?,
            None => self
                .config
                .default
                .clone()
                .ok_or_else(|| ApiError::BadRequest("no config given and the server has no default".into()))?,
        };
        let inline = match req.points {
            None => None,
            Some(rows) => {
                if rows.is_empty() {
                    return Err(ApiError::BadRequest("empty dataset".into()));
                }
                if let Some(t) = &req.truth {
                    if t.len() != rows.len() {
                        return Err(ApiError::BadRequest(format!(
                            "{} truth labels for {} points",
                            t.len(),
                            rows.len()
                        )));
                    }
                }
                Some(Dataset {
                    cloud: PointCloud::from_rows(&rows)?,
                    truth: req.truth,
                })
            }
        };
        let masc = config.masc.clone();
        let prepared = tokio::task::spawn_blocking(move || {
            let data = match inline {
                Some(d) => d,
                None => config.load_data()?,
            };
            prepare(data, config.preprocess, &config.metric, config.cache, config.kernel, config.masc.degree)
        })
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;

        let id = self.fresh_id();
        let log_path = self.config.log_dir.as_ref().map(|d| d.join(format!("{id}.queries.csv")));
        let session = Session::start(id.clone(), prepared, masc, log_path)?;
        self.sessions
            .write()
            .unwrap_or_else(|p| p.into_inner())
            .insert(id, Arc::clone(&session));
        session.settled().await;
        Ok(session)
    }
}

fn parse_json<T: serde::de::DeserializeOwned + Default>(body: &Bytes) -> Result<T, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body).map_err(|e| ApiError::BadRequest(format!("invalid JSON body: {e}")))
}

async fn create_session(State(app): State<AppState>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let req: CreateSession = parse_json(&body)?;
    let s = app.create(req).await?;
    let body = Created {
        id: s.id.clone(),
        phase: s.phase(),
        m: s.len(),
        dim: s.dim(),
    };
    Ok((StatusCode::CREATED, Json(body)))
}

async fn next_query(State(app): State<AppState>, UrlPath(id): UrlPath<String>) -> Result<Json<QueryResponse>, ApiError> {
    let s = app.get(&id)?;
    let phase = s.settled().await;
    Ok(Json(QueryResponse {
        phase,
        query: s.query(),
    }))
}

async fn submit_label(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Json<LabelResponse>, ApiError> {
    let s = app.get(&id)?;
    let req: LabelRequest = serde_json::from_slice(&body)
        .map_err(|e| ApiError::BadRequest(format!("invalid JSON body: {e}")))?;
    let _guard = s.submit_lock.lock().await;
    let replay = s.submit(req.point_id, req.label)?;
    let phase = s.settled().await;
    Ok(Json(LabelResponse {
        accepted: true,
        replay,
        phase,
    }))
}

async fn session_state(State(app): State<AppState>, UrlPath(id): UrlPath<String>) -> Result<Json<StateResponse>, ApiError> {
    Ok(Json(app.get(&id)?.state()))
}

async fn export(State(app): State<AppState>, UrlPath(id): UrlPath<String>) -> Result<impl IntoResponse, ApiError> {
    let csv = app.get(&id)?.export()?;
    Ok(([(header::CONTENT_TYPE, "text/csv")], csv))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/query", get(next_query))
        .route("/sessions/{id}/label", post(submit_label))
        .route("/sessions/{id}/state", get(session_state))
        .route("/sessions/{id}/export", get(export))
        .with_state(state)
}

pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}
