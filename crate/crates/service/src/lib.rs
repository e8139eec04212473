//! HTTP API for submitting mapping jobs and curating their results.
//!
//! Jobs live in memory; curation sessions are written to `data_dir` and
//! reloaded on startup.

pub mod error;
pub mod jobs;
pub mod sessions;
pub mod terms;

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::extract::DefaultBodyLimit;
use axum::routing::{get, patch, post};
use axum::Router;
use tokio::sync::Semaphore;

use ontomap::cache::CacheStore;
use ontomap::ontology::{build_hierarchy, HierarchyIndex, Ontology};
use ontomap::remote::Transport;

pub use error::ApiError;
pub use jobs::JobStore;
pub use sessions::{SessionError, SessionStore};

const MB: usize = 1024 * 1024;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Sessions are stored under `data_dir/sessions`.
    pub data_dir: PathBuf,
    /// Ontology cache; `None` uses the default location.
    pub cache_dir: Option<PathBuf>,
    /// Jobs allowed to run at the same time.
    pub workers: usize,
    pub max_upload_bytes: usize,
    pub max_ontology_bytes: usize,
}

impl ServiceConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        ServiceConfig {
            data_dir: data_dir.into(),
            cache_dir: None,
            workers: 2,
            max_upload_bytes: 50 * MB,
            max_ontology_bytes: 50 * MB,
        }
    }
}

/// An ontology with its hierarchy index, shared between jobs and lookups.
#[derive(Debug)]
pub struct LoadedOntology {
    pub ontology: Ontology,
    pub hierarchy: HierarchyIndex,
}

impl LoadedOntology {
    pub fn new(ontology: Ontology) -> Self {
        let hierarchy = build_hierarchy(&ontology);
        LoadedOntology { ontology, hierarchy }
    }
}

pub struct AppState {
    pub config: ServiceConfig,
    pub jobs: JobStore,
    pub sessions: SessionStore,
    pub cache: CacheStore,
    /// Transport for the remote mappers; `None` opens an HTTPS client per job.
    pub transport: Option<Arc<dyn Transport>>,
    workers: Arc<Semaphore>,
    cached: Mutex<HashMap<String, Arc<LoadedOntology>>>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Result<Self, SessionError> {
        Self::build(config, None)
    }

    /// Uses `transport` for the remote mappers.
    pub fn with_transport(config: ServiceConfig, transport: Arc<dyn Transport>) -> Result<Self, SessionError> {
        Self::build(config, Some(transport))
    }

    fn build(config: ServiceConfig, transport: Option<Arc<dyn Transport>>) -> Result<Self, SessionError> {
        let sessions = SessionStore::open(config.data_dir.join("sessions"))?;
        let cache = config
            .cache_dir
            .as_ref()
            .map(CacheStore::new)
            .unwrap_or_else(CacheStore::from_env);
        Ok(AppState {
            workers: Arc::new(Semaphore::new(config.workers.max(1))),
            jobs: JobStore::default(),
            sessions,
            cache,
            transport,
            cached: Mutex::new(HashMap::new()),
            config,
        })
    }

    /// Loads a cached ontology once and keeps it for later requests.
    pub fn cached_ontology(&self, acronym: &str) -> Result<Arc<LoadedOntology>, ontomap::cache::CacheError> {
        if let Some(hit) = self.cached.lock().expect("ontology memo poisoned").get(acronym) {
            return Ok(hit.clone());
        }
        let loaded = Arc::new(LoadedOntology::new(self.cache.load_cached(acronym)?));
        self.cached
            .lock()
            .expect("ontology memo poisoned")
            .insert(acronym.to_string(), loaded.clone());
        Ok(loaded)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    let limit = state.config.max_upload_bytes;
    Router::new()
        .route("/api/jobs", post(jobs::submit))
        .route("/api/jobs/{id}", get(jobs::status))
        .route("/api/jobs/{id}/result", get(jobs::result))
        .route("/api/jobs/{id}/result.csv", get(jobs::result_csv))
        .route("/api/jobs/{id}/graphs", get(jobs::graphs))
        .route("/api/sessions/resume", post(sessions::resume))
        .route("/api/sessions/{id}", get(sessions::show))
        .route("/api/sessions/{id}/result.csv", get(sessions::csv))
        .route("/api/sessions/{id}/rows/{row}", patch(sessions::update_row))
        .route("/api/terms/neighborhood", get(terms::neighborhood))
        .layer(DefaultBodyLimit::max(limit))
        .with_state(state)
}
