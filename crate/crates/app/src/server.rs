//! HTTP front end over [`crate::api`]. Handlers read an immutable
//! [`BundleSet`]; `POST /reload` re-reads the bundle files and swaps the
//! whole set at once.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Serialize;

use crate::api::{self, ApiError, ApplyOutcomeRequest, BundleSet, SimulateRequest, StateRequest};
use crate::bundle::ModelBundle;
use crate::error::AppError;

pub struct ServiceState {
    bundles: RwLock<Arc<BundleSet>>,
    sources: Vec<PathBuf>,
}

impl ServiceState {
    pub fn new(bundles: BundleSet, sources: Vec<PathBuf>) -> Self {
        Self {
            bundles: RwLock::new(Arc::new(bundles)),
            sources,
        }
    }

    /// Loads every bundle file named on the command line.
    pub fn load(sources: Vec<PathBuf>) -> Result<Self, AppError> {
        let set = load_set(&sources)?;
        Ok(Self::new(set, sources))
    }

    pub fn snapshot(&self) -> Arc<BundleSet> {
        self.bundles.read().expect("bundle lock poisoned").clone()
    }

    /// Re-reads the bundle files; the old set stays in place on failure.
    pub fn reload(&self) -> Result<usize, AppError> {
        let set = load_set(&self.sources)?;
        let n = set.len();
        *self.bundles.write().expect("bundle lock poisoned") = Arc::new(set);
        Ok(n)
    }
}

fn load_set(sources: &[PathBuf]) -> Result<BundleSet, AppError> {
    if sources.is_empty() {
        return Err(AppError::Usage("at least one bundle is required".into()));
    }
    let bundles = sources
        .iter()
        .map(|p| ModelBundle::load(p))
        .collect::<Result<Vec<_>, _>>()?;
    BundleSet::new(bundles).map_err(AppError::Data)
}

fn json<T: Serialize>(status: StatusCode, body: &T) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], api::to_body(body)).into_response()
}

fn reply<T: Serialize>(result: Result<T, ApiError>) -> Response {
    match result {
        Ok(body) => json(StatusCode::OK, &body),
        Err(e) => {
            let status = StatusCode::from_u16(e.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
            json(status, &e.body())
        }
    }
}

async fn health() -> &'static str {
    "ok"
}

async fn bundles(State(s): State<Arc<ServiceState>>) -> Response {
    json(StatusCode::OK, &api::list_bundles(&s.snapshot()))
}

async fn recommend(State(s): State<Arc<ServiceState>>, body: Bytes) -> Response {
    let set = s.snapshot();
    reply(api::parse_body::<StateRequest>(&body).and_then(|r| api::recommend_state(set.get(&r.bundle_id)?, r.state)))
}

async fn what_if(State(s): State<Arc<ServiceState>>, body: Bytes) -> Response {
    let set = s.snapshot();
    reply(api::parse_body::<StateRequest>(&body).and_then(|r| api::what_if(set.get(&r.bundle_id)?, r.state)))
}

async fn simulate(State(s): State<Arc<ServiceState>>, body: Bytes) -> Response {
    let set = s.snapshot();
    let result = match api::parse_body::<SimulateRequest>(&body) {
        Ok(r) => {
            // Rollouts are CPU-bound; keep them off the async workers.
            tokio::task::spawn_blocking(move || {
                api::simulate(set.get(&r.bundle_id)?, r.state, r.episodes, r.seed)
            })
            .await
            .unwrap_or_else(|e| {
                Err(ApiError {
                    status: 500,
                    code: "internal",
                    message: e.to_string(),
                    terminal_status: None,
                })
            })
        }
        Err(e) => Err(e),
    };
    reply(result)
}

async fn apply_outcome(body: Bytes) -> Response {
    reply(api::parse_body::<ApplyOutcomeRequest>(&body).and_then(|r| api::apply_outcome(r.state, r.outcome)))
}

#[derive(Serialize)]
struct ReloadResponse {
    schema_version: u32,
    bundles: usize,
}

async fn reload(State(s): State<Arc<ServiceState>>) -> Response {
    let result = tokio::task::spawn_blocking(move || s.reload()).await;
    match result {
        Ok(Ok(n)) => json(
            StatusCode::OK,
            &ReloadResponse {
                schema_version: chase_core::doc::SCHEMA_VERSION,
                bundles: n,
            },
        ),
        Ok(Err(e)) => {
            log::error!("reload failed: {e}");
            reply::<()>(Err(ApiError {
                status: 500,
                code: "reload_failed",
                message: e.to_string(),
                terminal_status: None,
            }))
        }
        Err(e) => reply::<()>(Err(ApiError {
            status: 500,
            code: "internal",
            message: e.to_string(),
            terminal_status: None,
        })),
    }
}

pub fn router(state: Arc<ServiceState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/bundles", get(bundles))
        .route("/recommend", post(recommend))
        .route("/what-if", post(what_if))
        .route("/simulate", post(simulate))
        .route("/apply-outcome", post(apply_outcome))
        .route("/reload", post(reload))
        .with_state(state)
}

/// Serves until ctrl-c.
pub async fn serve(state: Arc<ServiceState>, addr: SocketAddr) -> Result<(), AppError> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| AppError::Data(format!("cannot bind {addr}: {e}")))?;
    log::info!("listening on {}", listener.local_addr().map(|a| a.to_string()).unwrap_or_default());
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| AppError::Data(format!("server error: {e}")))
}
