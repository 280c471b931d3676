//! HTTP service for the deployment registry.
//!
//! Serves the corpus read-only from an in-memory snapshot and queues
//! submissions in a pending directory for an operator to promote.

pub mod api;
pub mod guide;
pub mod pending;
pub mod rate_limit;
pub mod state;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use tokio::net::TcpListener;

pub use api::router;
pub use state::AppState;

pub const DEFAULT_PORT: u16 = 8080;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub corpus_dir: PathBuf,
    pub pending_dir: PathBuf,
    pub port: u16,
    pub cors_origin: Option<String>,
    /// Serve the guide from this directory instead of the built-in copy.
    pub guide_dir: Option<PathBuf>,
    /// How often the corpus directory is checked for changes.
    pub reload_interval: Duration,
}

impl ServiceConfig {
    pub fn new(corpus_dir: impl Into<PathBuf>, pending_dir: impl Into<PathBuf>) -> Self {
        ServiceConfig {
            corpus_dir: corpus_dir.into(),
            pending_dir: pending_dir.into(),
            port: DEFAULT_PORT,
            cors_origin: None,
            guide_dir: None,
            reload_interval: Duration::from_secs(2),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error(transparent)]
    Guide(#[from] guide::GuideError),
    #[error(transparent)]
    Corpus(#[from] dp_registry::io::CorpusError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

/// Loads the guide and corpus. Fails if either is unusable.
pub fn build_state(config: &ServiceConfig) -> Result<Arc<AppState>, ServeError> {
    let guide = match &config.guide_dir {
        Some(dir) => guide::load_dir(dir)?,
        None => guide::shipped()?,
    };
    std::fs::create_dir_all(&config.pending_dir).map_err(|source| ServeError::Io {
        context: format!("cannot create {}", config.pending_dir.display()),
        source,
    })?;
    Ok(Arc::new(AppState::load(
        config.corpus_dir.clone(),
        config.pending_dir.clone(),
        guide,
    )?))
}

/// Reloads the snapshot whenever the corpus files change on disk.
pub fn spawn_reloader(state: Arc<AppState>, interval: Duration) -> tokio::task::JoinHandle<()> {
    tokio::spawn(async move {
        let mut last = state::corpus_fingerprint(&state.corpus_dir).ok();
        let mut ticker = tokio::time::interval(interval);
        ticker.tick().await;
        loop {
            ticker.tick().await;
            let current = state::corpus_fingerprint(&state.corpus_dir).ok();
            if current != last {
                if let Err(e) = state.reload() {
                    tracing::warn!("corpus reload failed: {e}");
                }
                last = current;
            }
        }
    })
}

/// Serves on an already-bound listener until the process stops.
pub async fn serve_on(listener: TcpListener, config: &ServiceConfig) -> Result<(), ServeError> {
    let state = build_state(config)?;
    spawn_reloader(state.clone(), config.reload_interval);
    let app = router(state, config.cors_origin.as_deref());
    let addr = listener.local_addr().ok();
    tracing::info!(?addr, "listening");
    axum::serve(listener, app.into_make_service_with_connect_info::<SocketAddr>())
        .await
        .map_err(|source| ServeError::Io {
            context: "server stopped".into(),
            source,
        })
}

pub async fn serve(config: &ServiceConfig) -> Result<(), ServeError> {
    let listener = TcpListener::bind(("0.0.0.0", config.port))
        .await
        .map_err(|source| ServeError::Io {
            context: format!("cannot bind port {}", config.port),
            source,
        })?;
    serve_on(listener, config).await
}
