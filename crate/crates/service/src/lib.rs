//! HTTP facade over an [`AcademicGraph`] exposing `/evaluate` and
//! `/calchistogram` in the style of the Academic Knowledge API, plus
//! `/health` and an admin `/reload`.

use std::collections::BTreeMap;
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::PathBuf;
use std::sync::{Arc, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use akg_core::ingest::load_path;
use akg_core::query::parse_attribute_list;
use akg_core::{
    calc_histogram, evaluate, AcademicGraph, Attribute, CitationMode, HistogramError, IngestError,
    Query, QueryError, QueryOptions, RequestCap,
};
use axum::extract::{Query as Params, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::{json, Map, Value};

pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_COUNT: usize = 10;
pub const MAX_COUNT: usize = 1000;
const DEFAULT_EVALUATE_ATTRIBUTES: &str = "Id,Ti";

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub bind: IpAddr,
    pub port: u16,
    pub snapshot: Option<PathBuf>,
    pub strict: bool,
    pub citation_mode: CitationMode,
    pub cap: RequestCap,
    pub default_count: usize,
    pub max_count: usize,
    pub extended_query: bool,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            bind: IpAddr::V4(Ipv4Addr::LOCALHOST),
            port: DEFAULT_PORT,
            snapshot: None,
            strict: false,
            citation_mode: CitationMode::Stored,
            cap: RequestCap::default(),
            default_count: DEFAULT_COUNT,
            max_count: MAX_COUNT,
            extended_query: false,
        }
    }
}

impl ServiceConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.port == 0 {
            return Err("port must be in 1..=65535".into());
        }
        if self.default_count == 0 || self.max_count == 0 {
            return Err("counts must be positive".into());
        }
        if self.default_count > self.max_count {
            return Err(format!(
                "default count {} exceeds max count {}",
                self.default_count, self.max_count
            ));
        }
        Ok(())
    }

    pub fn socket_addr(&self) -> SocketAddr {
        SocketAddr::new(self.bind, self.port)
    }
}

/// A loaded graph plus where it came from.
#[derive(Debug)]
pub struct Snapshot {
    pub graph: AcademicGraph,
    pub source: Option<PathBuf>,
    pub loaded_at_unix: u64,
}

impl Snapshot {
    pub fn new(graph: AcademicGraph, source: Option<PathBuf>) -> Self {
        let loaded_at_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            graph,
            source,
            loaded_at_unix,
        }
    }

    fn metadata(&self) -> Value {
        json!({
            "status": "ok",
            "snapshot": self.source.as_ref().map(|p| p.display().to_string()),
            "papers": self.graph.paper_count(),
            "journals": self.graph.journals().count(),
            "loaded_at_unix": self.loaded_at_unix,
        })
    }
}

/// Shared state. Requests clone the current `Arc<Snapshot>` and keep using it
/// even if a reload swaps in a new one meanwhile.
#[derive(Debug)]
pub struct AppState {
    config: ServiceConfig,
    snapshot: RwLock<Option<Arc<Snapshot>>>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        Self {
            config,
            snapshot: RwLock::new(None),
        }
    }

    pub fn with_graph(config: ServiceConfig, graph: AcademicGraph) -> Self {
        let state = Self::new(config);
        state.install(Snapshot::new(graph, None));
        state
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn current(&self) -> Option<Arc<Snapshot>> {
        self.snapshot
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .clone()
    }

    pub fn install(&self, snapshot: Snapshot) {
        *self.snapshot.write().unwrap_or_else(|e| e.into_inner()) = Some(Arc::new(snapshot));
    }

    /// Load the configured snapshot path and swap it in. On failure the
    /// previous snapshot stays active.
    pub fn reload(&self) -> Result<Arc<Snapshot>, ReloadError> {
        let path = self
            .config
            .snapshot
            .clone()
            .ok_or(ReloadError::NoSnapshotPath)?;
        let (graph, report) = load_path(&path, self.config.strict, self.config.citation_mode)?;
        tracing::info!(
            papers = report.papers,
            dropped = report.rows_dropped(),
            path = %path.display(),
            "snapshot loaded"
        );
        self.install(Snapshot::new(graph, Some(path)));
        Ok(self.current().expect("snapshot just installed"))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReloadError {
    #[error("no snapshot path configured")]
    NoSnapshotPath,
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

/// An error response: status plus the `{"error": {...}}` envelope.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    position: Option<usize>,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
            position: None,
        }
    }

    fn invalid_parameter(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "InvalidParameter", message)
    }

    fn unavailable() -> Self {
        Self::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "SnapshotUnavailable",
            "no snapshot is loaded",
        )
    }

    pub fn body(&self) -> Value {
        let mut inner = Map::new();
        inner.insert("code".into(), Value::from(self.code));
        inner.insert("message".into(), Value::from(self.message.as_str()));
        if let Some(p) = self.position {
            inner.insert("position".into(), Value::from(p));
        }
        let mut root = Map::new();
        root.insert("error".into(), Value::Object(inner));
        Value::Object(root)
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            code: e.code(),
            message: e.to_string(),
            position: e.position(),
        }
    }
}

impl From<HistogramError> for ApiError {
    fn from(e: HistogramError) -> Self {
        match e {
            HistogramError::Query(q) => q.into(),
            cap @ HistogramError::CapExceeded { .. } => Self::new(
                StatusCode::PAYLOAD_TOO_LARGE,
                "CapExceeded",
                cap.to_string(),
            ),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body())).into_response()
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/evaluate", get(handle_evaluate))
        .route("/calchistogram", get(handle_calchistogram))
        .route("/health", get(handle_health))
        .route("/reload", post(handle_reload))
        .with_state(state)
}

/// Bind and serve until the process is stopped.
pub async fn serve(state: Arc<AppState>) -> std::io::Result<()> {
    let addr = state.config.socket_addr();
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, router(state)).await
}

/// Query parameters, rejecting unknown and repeated names.
fn collect_params(
    raw: Vec<(String, String)>,
    allowed: &[&str],
) -> Result<BTreeMap<String, String>, ApiError> {
    let mut out = BTreeMap::new();
    for (k, v) in raw {
        if !allowed.contains(&k.as_str()) {
            return Err(ApiError::invalid_parameter(format!(
                "unknown parameter {k:?}; expected one of {}",
                allowed.join(", ")
            )));
        }
        if out.insert(k.clone(), v).is_some() {
            return Err(ApiError::invalid_parameter(format!(
                "parameter {k:?} given more than once"
            )));
        }
    }
    Ok(out)
}

fn parse_count(
    params: &BTreeMap<String, String>,
    name: &str,
    default: usize,
) -> Result<usize, ApiError> {
    match params.get(name) {
        None => Ok(default),
        Some(v) => v.parse::<usize>().map_err(|_| {
            ApiError::invalid_parameter(format!("{name} must be a non-negative integer, got {v:?}"))
        }),
    }
}

fn parse_expr(params: &BTreeMap<String, String>, extended: bool) -> Result<Query, ApiError> {
    let text = params
        .get("expr")
        .ok_or_else(|| ApiError::from(QueryError::syntax(0, &["expr parameter"])))?;
    Ok(Query::parse(
        text,
        QueryOptions {
            extended_query: extended,
        },
    )?)
}

fn parse_attributes(list: &str) -> Result<Vec<Attribute>, ApiError> {
    let attrs = parse_attribute_list(list)?;
    if attrs.is_empty() {
        return Err(ApiError::invalid_parameter("attributes must not be empty"));
    }
    Ok(attrs)
}

fn snapshot(state: &AppState) -> Result<Arc<Snapshot>, ApiError> {
    state.current().ok_or_else(ApiError::unavailable)
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string()))?
}

async fn handle_evaluate(
    State(state): State<Arc<AppState>>,
    Params(raw): Params<Vec<(String, String)>>,
) -> Result<Json<Value>, ApiError> {
    let params = collect_params(raw, &["expr", "count", "offset", "attributes"])?;
    let cfg = state.config();
    let query = parse_expr(&params, cfg.extended_query)?;
    let count = parse_count(&params, "count", cfg.default_count)?;
    if count > cfg.max_count {
        return Err(ApiError::invalid_parameter(format!(
            "count {count} exceeds the maximum of {}",
            cfg.max_count
        )));
    }
    let offset = parse_count(&params, "offset", 0)?;
    let attributes = parse_attributes(
        params
            .get("attributes")
            .map(String::as_str)
            .unwrap_or(DEFAULT_EVALUATE_ATTRIBUTES),
    )?;
    let snap = snapshot(&state)?;
    let body =
        blocking(move || Ok(evaluate(&snap.graph, &query, count, offset, &attributes)?.to_json()))
            .await?;
    Ok(Json(body))
}

async fn handle_calchistogram(
    State(state): State<Arc<AppState>>,
    Params(raw): Params<Vec<(String, String)>>,
) -> Result<Json<Value>, ApiError> {
    let params = collect_params(raw, &["expr", "attributes"])?;
    let cfg = state.config();
    let query = parse_expr(&params, cfg.extended_query)?;
    let list = params
        .get("attributes")
        .ok_or_else(|| ApiError::invalid_parameter("attributes parameter is required"))?;
    let attributes = parse_attributes(list)?;
    let cap = cfg.cap;
    let snap = snapshot(&state)?;
    let body =
        blocking(move || Ok(calc_histogram(&snap.graph, &query, &attributes, cap)?.to_json()))
            .await?;
    Ok(Json(body))
}

async fn handle_health(State(state): State<Arc<AppState>>) -> Response {
    match state.current() {
        Some(snap) => (StatusCode::OK, Json(snap.metadata())).into_response(),
        None => (
            StatusCode::SERVICE_UNAVAILABLE,
            Json(json!({ "status": "unavailable" })),
        )
            .into_response(),
    }
}

async fn handle_reload(State(state): State<Arc<AppState>>) -> Result<Json<Value>, ApiError> {
    let snap = blocking(move || {
        state.reload().map_err(|e| match e {
            ReloadError::NoSnapshotPath => {
                ApiError::new(StatusCode::CONFLICT, "NoSnapshotPath", e.to_string())
            }
            ReloadError::Ingest(inner) => ApiError::new(
                StatusCode::INTERNAL_SERVER_ERROR,
                "LoadFailed",
                inner.to_string(),
            ),
        })
    })
    .await?;
    Ok(Json(snap.metadata()))
}
