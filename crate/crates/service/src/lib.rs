//! HTTP JSON API over a directory of HOT-PIE projects.
//!
//! Every mutation carries `If-Match: <version>`. A stale version is answered
//! with 409 and the current version, so a client never overwrites work it
//! has not seen.

pub mod api;
pub mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::http::{header, HeaderValue, Method};
use hotpie_core::analysis::{modaf_profiles, parse_profiles};
use hotpie_core::taxonomy::{default_catalog, ReferenceCatalog};
use tower_http::cors::{AllowOrigin, CorsLayer};

pub use api::{router, ApiError, AppState};
pub use store::{system_clock, Clock, Mutation, ProjectStore, StoreError};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub bind: SocketAddr,
    pub root: PathBuf,
    /// Catalog document; the bundled catalog when absent.
    pub catalog: Option<PathBuf>,
    /// View-profile document; the bundled profiles when absent.
    pub profiles: Option<PathBuf>,
    /// Origins allowed by CORS; any origin when empty.
    pub cors_origins: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("{0}: {1}")]
    Load(PathBuf, String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("invalid CORS origin '{0}'")]
    Origin(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn load_state(config: &ServiceConfig, clock: Clock) -> Result<AppState, ServeError> {
    let catalog = match &config.catalog {
        None => default_catalog().clone(),
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| e.to_string())
            .and_then(|text| ReferenceCatalog::from_json(&text).map_err(|e| e.to_string()))
            .map_err(|e| ServeError::Load(p.clone(), e))?,
    };
    let profiles = match &config.profiles {
        None => modaf_profiles().to_vec(),
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| e.to_string())
            .and_then(|text| parse_profiles(&text).map_err(|e| e.to_string()))
            .map_err(|e| ServeError::Load(p.clone(), e))?,
    };
    Ok(AppState {
        store: Arc::new(ProjectStore::open(&config.root, clock)?),
        catalog: Arc::new(catalog),
        profiles: Arc::new(profiles),
    })
}

pub fn cors(origins: &[String]) -> Result<CorsLayer, ServeError> {
    let allow = if origins.is_empty() {
        AllowOrigin::any()
    } else {
        let values = origins
            .iter()
            .map(|o| HeaderValue::from_str(o).map_err(|_| ServeError::Origin(o.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        AllowOrigin::list(values)
    };
    Ok(CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE, header::IF_MATCH])
        .expose_headers([header::ETAG]))
}

/// Runs the service until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> Result<(), ServeError> {
    let state = load_state(&config, system_clock())?;
    let app = router(state).layer(cors(&config.cors_origins)?);
    let listener = tokio::net::TcpListener::bind(config.bind).await?;
    tracing::info!(addr = %listener.local_addr()?, root = %config.root.display(), "serving");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
