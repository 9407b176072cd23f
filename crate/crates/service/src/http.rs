use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, HeaderValue, Method, StatusCode, Uri};
use axum::response::IntoResponse;
use axum::routing::post;
use axum::Router;
use tokio::net::TcpListener;

use crate::app::{App, Response};
use crate::bundle::{load_data_root, BundleError, BundleOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub listen: String,
    pub data_root: PathBuf,
    pub cors_allowed: bool,
    pub bundle: BundleOptions,
    /// Defaults to `<data_root>/.sessions`.
    pub session_dir: Option<PathBuf>,
}

impl ServiceConfig {
    pub fn new(listen: impl Into<String>, data_root: PathBuf) -> Self {
        Self {
            listen: listen.into(),
            data_root,
            cors_allowed: false,
            bundle: BundleOptions::default(),
            session_dir: None,
        }
    }
}

#[derive(Clone)]
struct Shared {
    app: Arc<App>,
    cors: bool,
}

fn to_http(resp: Response, cors: bool, if_none_match: Option<&HeaderValue>) -> axum::response::Response {
    let not_modified = matches!((&resp.etag, if_none_match), (Some(tag), Some(sent)) if sent.as_bytes() == tag.as_bytes());
    let status = if not_modified {
        StatusCode::NOT_MODIFIED
    } else {
        StatusCode::from_u16(resp.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR)
    };
    let body = if not_modified { Body::empty() } else { Body::from(resp.body) };
    let mut out = (status, body).into_response();
    let headers = out.headers_mut();
    headers.insert(header::CONTENT_TYPE, HeaderValue::from_static(resp.content_type));
    if let Some(tag) = resp.etag.and_then(|t| HeaderValue::from_str(&t).ok()) {
        headers.insert(header::ETAG, tag);
    }
    if cors {
        headers.insert(header::ACCESS_CONTROL_ALLOW_ORIGIN, HeaderValue::from_static("*"));
        headers.insert(header::ACCESS_CONTROL_EXPOSE_HEADERS, HeaderValue::from_static("etag"));
    }
    out
}

async fn get_any(State(s): State<Shared>, method: Method, uri: Uri, headers: HeaderMap) -> axum::response::Response {
    if method == Method::OPTIONS && s.cors {
        let mut out = StatusCode::NO_CONTENT.into_response();
        let h = out.headers_mut();
        h.insert(header::ACCESS_CONTROL_ALLOW_ORIGIN, HeaderValue::from_static("*"));
        h.insert(header::ACCESS_CONTROL_ALLOW_METHODS, HeaderValue::from_static("GET, POST, OPTIONS"));
        h.insert(header::ACCESS_CONTROL_ALLOW_HEADERS, HeaderValue::from_static("content-type, if-none-match"));
        return out;
    }
    if method != Method::GET && method != Method::HEAD {
        return StatusCode::METHOD_NOT_ALLOWED.into_response();
    }
    let app = Arc::clone(&s.app);
    let path = uri.path().to_string();
    let resp = tokio::task::spawn_blocking(move || app.handle_get(&path))
        .await
        .expect("GET handler panicked");
    to_http(resp, s.cors, headers.get(header::IF_NONE_MATCH))
}

async fn post_event(State(s): State<Shared>, Path(sid): Path<String>, body: Bytes) -> axum::response::Response {
    let app = Arc::clone(&s.app);
    let resp = tokio::task::spawn_blocking(move || app.handle_session_event(&sid, &body))
        .await
        .expect("session handler panicked");
    to_http(resp, s.cors, None)
}

/// HTTP routes over an [`App`]: `POST /session/{sid}` for events, every
/// other `GET` through [`App::handle_get`].
pub fn router(app: Arc<App>, cors: bool) -> Router {
    Router::new()
        .route("/session/{sid}", post(post_event).get(get_any).options(get_any))
        .fallback(get_any)
        .with_state(Shared { app, cors })
}

/// Load every dataset under the data root into an [`App`].
pub fn build_app(config: &ServiceConfig) -> Result<App, BundleError> {
    let bundles = load_data_root(&config.data_root, &config.bundle)?;
    let dir = config
        .session_dir
        .clone()
        .unwrap_or_else(|| config.data_root.join(".sessions"));
    Ok(App::new(bundles).with_session_dir(dir))
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error("cannot listen on {addr}: {source}")]
    Bind { addr: String, source: std::io::Error },
    #[error("server error: {0}")]
    Serve(std::io::Error),
}

/// Bind `listener` and serve until ctrl-c.
pub async fn serve_on(listener: TcpListener, app: Arc<App>, cors: bool) -> std::io::Result<()> {
    axum::serve(listener, router(app, cors))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

pub async fn serve(config: ServiceConfig) -> Result<(), ServeError> {
    let app = Arc::new(build_app(&config)?);
    let listener = TcpListener::bind(&config.listen).await.map_err(|source| ServeError::Bind {
        addr: config.listen.clone(),
        source,
    })?;
    let addr: Option<SocketAddr> = listener.local_addr().ok();
    if let Some(addr) = addr {
        println!("listen={addr}");
        println!("datasets={}", ridgeview::linkage::DesignIndex::dataset_ids(&*app).join(","));
    }
    serve_on(listener, app, config.cors_allowed).await.map_err(ServeError::Serve)
}
