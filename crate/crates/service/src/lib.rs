//! HTTP front end for interactive exploration.
//!
//! The service holds one loaded dataset. Every request works against an
//! immutable [`Snapshot`]; a layout recompute builds a new snapshot on a
//! background thread and swaps it in, bumping the revision and dropping
//! all cached fields.

mod params;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use mdcontour::field::{MlsVariant, ALPHA_MAX, ALPHA_MIN_EXCLUSIVE, ALPHA_SLIDER};
use mdcontour::layout::{LayoutError, LayoutOverrides, LayoutParams};
use mdcontour::pipeline::{DimSpec, FieldBundle, PipelineError, Prepared, RenderOptions, MAX_SIDE};
use mdcontour::render::{RenderMode, Texture};
use serde_json::{json, Value};
use tower_http::services::ServeDir;

pub use params::ApiError;

/// Cached fields beyond this count are dropped wholesale.
const CACHE_LIMIT: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct FieldKey {
    dim: DimSpec,
    variant: MlsVariant,
    alpha: Option<u64>,
    relax: u64,
    width: usize,
    height: usize,
}

impl FieldKey {
    fn new(dim: &DimSpec, o: &RenderOptions) -> FieldKey {
        FieldKey {
            dim: dim.clone(),
            variant: o.variant,
            alpha: o.alpha.map(f64::to_bits),
            relax: o.relax.to_bits(),
            width: o.width,
            height: o.height,
        }
    }
}

/// One immutable published state of the session.
pub struct Snapshot {
    pub revision: u64,
    pub prepared: Arc<Prepared>,
    pub overrides: LayoutOverrides,
    fields: Mutex<HashMap<FieldKey, Arc<FieldBundle>>>,
}

impl Snapshot {
    fn new(revision: u64, prepared: Prepared, overrides: LayoutOverrides) -> Snapshot {
        Snapshot {
            revision,
            prepared: Arc::new(prepared),
            overrides,
            fields: Mutex::new(HashMap::new()),
        }
    }

    fn field(&self, dim: &DimSpec, opts: &RenderOptions) -> Result<Arc<FieldBundle>, PipelineError> {
        let key = FieldKey::new(dim, opts);
        if let Some(hit) = self.fields.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let bundle = Arc::new(self.prepared.field(dim, opts)?);
        let mut cache = self.fields.lock().unwrap();
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        Ok(cache.entry(key).or_insert(bundle).clone())
    }

    pub fn cached_fields(&self) -> usize {
        self.fields.lock().unwrap().len()
    }
}

pub struct AppState {
    current: RwLock<Arc<Snapshot>>,
    busy: AtomicBool,
    texture: Option<Texture>,
}

impl AppState {
    pub fn new(prepared: Prepared, overrides: LayoutOverrides, texture: Option<Texture>) -> Arc<AppState> {
        Arc::new(AppState {
            current: RwLock::new(Arc::new(Snapshot::new(0, prepared, overrides))),
            busy: AtomicBool::new(false),
            texture,
        })
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.current.read().unwrap().clone()
    }

    pub fn layout_in_progress(&self) -> bool {
        self.busy.load(Ordering::SeqCst)
    }
}

pub fn router(state: Arc<AppState>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/meta", get(meta))
        .route("/api/defaults", get(defaults))
        .route("/api/positions", get(positions))
        .route("/api/render.png", get(render_png))
        .route("/api/layout", post(start_layout))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

fn defaults_json(snap: &Snapshot) -> Value {
    let o = RenderOptions::default();
    let alpha: serde_json::Map<String, Value> = MlsVariant::ALL
        .iter()
        .map(|v| (v.name().to_string(), json!(v.default_alpha())))
        .collect();
    let layout: &LayoutParams = snap.prepared.layout.params();
    json!({
        "variant": o.variant,
        "variants": MlsVariant::ALL,
        "alpha": alpha,
        "alphaRange": [ALPHA_SLIDER.0, ALPHA_SLIDER.1],
        "alphaLimits": { "minExclusive": ALPHA_MIN_EXCLUSIVE, "max": ALPHA_MAX },
        "relax": o.relax,
        "relaxRange": [0.0, 1.0],
        "mode": o.mode,
        "modes": RenderMode::ALL,
        "spacing": "auto",
        "width": o.width,
        "height": o.height,
        "maxSide": MAX_SIDE,
        "dim": default_dim(snap),
        "layout": layout,
    })
}

fn default_dim(snap: &Snapshot) -> String {
    snap.prepared.column_names().into_iter().next().unwrap_or_default()
}

async fn meta(State(state): State<Arc<AppState>>) -> Json<Value> {
    let snap = state.snapshot();
    let p = &snap.prepared;
    Json(json!({
        "columns": p.column_names(),
        "rowCount": p.raw.row_count(),
        "revision": snap.revision,
        "layoutInProgress": state.layout_in_progress(),
        "defaults": defaults_json(&snap),
    }))
}

async fn defaults(State(state): State<Arc<AppState>>) -> Json<Value> {
    Json(defaults_json(&state.snapshot()))
}

async fn positions(
    State(state): State<Arc<AppState>>,
    Query(q): Query<HashMap<String, String>>,
) -> Result<Json<Value>, ApiError> {
    let t = params::relax(&q)?;
    let snap = state.snapshot();
    let p = &snap.prepared;
    let pos = p.positions_at(t).map_err(internal)?;
    let mesh = &p.layout.mesh;
    let pairs = |v: &[mdcontour::Vec2]| v.iter().map(|p| [p.x, p.y]).collect::<Vec<_>>();
    Ok(Json(json!({
        "revision": snap.revision,
        "relax": t,
        "positions": pairs(&pos),
        "original": pairs(p.original()),
        "triangles": mesh.triangles,
        "flips": mesh.count_flips(&pos),
    })))
}

fn internal(e: PipelineError) -> ApiError {
    match e {
        PipelineError::UnknownDimension { .. } => ApiError::new(StatusCode::NOT_FOUND, e.to_string()),
        e if e.is_usage() => ApiError::field("dim", e.to_string()),
        e => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn render_png(
    State(state): State<Arc<AppState>>,
    Query(q): Query<HashMap<String, String>>,
) -> Result<Response, ApiError> {
    let snap = state.snapshot();
    let mut req = params::render_query(&q, &default_dim(&snap))?;
    req.options.texture = state.texture.clone();
    let revision = snap.revision;
    let png = tokio::task::spawn_blocking(move || -> Result<Vec<u8>, PipelineError> {
        snap.prepared.resolve_dims(&mdcontour::pipeline::DimSelection::List(vec![req.dim.clone()]))?;
        let bundle = snap.field(&req.dim, &req.options)?;
        let img = snap.prepared.paint(&bundle, &req.options)?;
        Ok(img.to_png()?)
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
    .map_err(|e| match e {
        PipelineError::Usage(m) if m.contains("rigid") => ApiError::field("variant", m),
        PipelineError::Usage(m) if m.contains("gradient") => ApiError::field("mode", m),
        e => internal(e),
    })?;
    Ok((
        [
            (header::CONTENT_TYPE, "image/png".to_string()),
            (header::HeaderName::from_static("x-revision"), revision.to_string()),
        ],
        png,
    )
        .into_response())
}

fn layout_error(e: PipelineError) -> ApiError {
    match e {
        PipelineError::Layout(LayoutError::InvalidParam { name, value, expected }) => {
            ApiError::field(name, format!("{value} is out of range ({expected})"))
        }
        e => ApiError::new(StatusCode::BAD_REQUEST, e.to_string()),
    }
}

/// Clears the busy flag even if the recompute panics.
struct BusyGuard(Arc<AppState>);

impl Drop for BusyGuard {
    fn drop(&mut self) {
        self.0.busy.store(false, Ordering::SeqCst);
    }
}

async fn start_layout(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let overrides: LayoutOverrides = if body.iter().all(u8::is_ascii_whitespace) {
        LayoutOverrides::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?
    };
    let snap = state.snapshot();
    overrides
        .resolve(&snap.prepared.layout.mesh)
        .map_err(|e| layout_error(e.into()))?;
    if state
        .busy
        .compare_exchange(false, true, Ordering::SeqCst, Ordering::SeqCst)
        .is_err()
    {
        return Err(ApiError::new(StatusCode::CONFLICT, "a layout recompute is already in progress"));
    }
    let guard = BusyGuard(state.clone());
    tokio::task::spawn_blocking(move || {
        let snap = guard.0.snapshot();
        match snap.prepared.relayout(&overrides) {
            Ok(layout) => {
                let prepared = Prepared {
                    layout,
                    ..(*snap.prepared).clone()
                };
                let mut current = guard.0.current.write().unwrap();
                let revision = current.revision + 1;
                *current = Arc::new(Snapshot::new(revision, prepared, overrides));
                log::info!("layout revision {revision} published");
            }
            Err(e) => log::error!("layout recompute failed: {e}"),
        }
        drop(guard);
    });
    Ok((
        StatusCode::ACCEPTED,
        Json(json!({ "status": "started", "revision": snap.revision })),
    )
        .into_response())
}

/// Serve until the process is stopped.
pub async fn serve(state: Arc<AppState>, addr: SocketAddr, static_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state, static_dir)).await
}

/// Start a runtime and serve `prepared` on `addr`.
pub fn run_blocking(
    prepared: Prepared,
    overrides: LayoutOverrides,
    texture: Option<Texture>,
    addr: SocketAddr,
    static_dir: Option<PathBuf>,
) -> std::io::Result<()> {
    let state = AppState::new(prepared, overrides, texture);
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?
        .block_on(serve(state, addr, static_dir))
}
