//! Clients for remote annotation services.
//!
//! HTTP goes through the [`Transport`] trait so tests can substitute canned
//! responses. Requests run on at most `concurrency` threads, each pausing
//! `delay` between calls, and retry with exponential backoff on 429, 5xx and
//! transport failures.

mod bioportal;
mod zooma;

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bioportal::{bioportal_annotate, BIOPORTAL_API_KEY_ENV, BIOPORTAL_BASE_URL};
pub use zooma::{confidence_score, zooma_annotate, ZOOMA_BASE_URL};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpRequest {
    pub url: String,
    pub headers: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: Vec<u8>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{0}")]
pub struct TransportError(pub String);

/// Performs one GET request. Implementations must honour `timeout`.
pub trait Transport: Send + Sync {
    fn get(&self, request: &HttpRequest, timeout: Duration) -> Result<HttpResponse, TransportError>;
}

impl<F> Transport for F
where
    F: Fn(&HttpRequest) -> Result<HttpResponse, TransportError> + Send + Sync,
{
    fn get(&self, request: &HttpRequest, _timeout: Duration) -> Result<HttpResponse, TransportError> {
        self(request)
    }
}

/// Blocking HTTPS transport.
#[derive(Debug, Clone, Default)]
pub struct ReqwestTransport {
    client: reqwest::blocking::Client,
}

impl ReqwestTransport {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Transport for ReqwestTransport {
    fn get(&self, request: &HttpRequest, timeout: Duration) -> Result<HttpResponse, TransportError> {
        let mut builder = self.client.get(&request.url).timeout(timeout);
        for (name, value) in &request.headers {
            builder = builder.header(name, value);
        }
        let response = builder.send().map_err(|e| TransportError(e.to_string()))?;
        let status = response.status().as_u16();
        let body = response.bytes().map_err(|e| TransportError(e.to_string()))?.to_vec();
        Ok(HttpResponse { status, body })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RemoteError {
    #[error("service rejected the credentials (HTTP {status})")]
    Credential { status: u16 },
    #[error("an API key is required")]
    MissingApiKey,
    #[error("invalid service URL {0}")]
    BadUrl(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemoteConfig {
    pub base_url: String,
    /// Comma-separated acronyms, or `all`.
    pub ontologies: String,
    pub api_key: Option<String>,
    pub batch_size: usize,
    pub delay: Duration,
    pub max_retries: u32,
    pub backoff: Duration,
    pub max_backoff: Duration,
    pub timeout: Duration,
    pub concurrency: usize,
}

impl RemoteConfig {
    pub fn new(base_url: impl Into<String>, ontologies: impl Into<String>) -> Self {
        RemoteConfig {
            base_url: base_url.into(),
            ontologies: ontologies.into(),
            api_key: None,
            batch_size: 50,
            delay: Duration::from_millis(200),
            max_retries: 4,
            backoff: Duration::from_millis(500),
            max_backoff: Duration::from_secs(30),
            timeout: Duration::from_secs(30),
            concurrency: 2,
        }
    }

    /// Acronyms requested, or `None` for every ontology.
    fn ontology_list(&self) -> Option<Vec<String>> {
        let list: Vec<String> = self
            .ontologies
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        if list.is_empty() || list.iter().any(|s| s.eq_ignore_ascii_case("all")) {
            None
        } else {
            Some(list)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteAnnotation {
    /// Position of the source term in the request list.
    pub source_index: usize,
    pub source_text: String,
    pub term_iri: String,
    pub term_label: String,
    pub ontology_acronym: String,
    pub score: f64,
    pub raw_payload: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermFailure {
    pub source_index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RemoteOutcome {
    /// Sorted by source index; within a term, in response order.
    pub annotations: Vec<RemoteAnnotation>,
    pub failures: Vec<TermFailure>,
    pub warnings: Vec<String>,
}

/// One request covering the source terms at `members`.
struct Job {
    request: HttpRequest,
    members: Vec<usize>,
}

enum Fetch {
    Body(Vec<u8>),
    Failed(String),
}

fn fetch_with_retry(
    transport: &dyn Transport,
    config: &RemoteConfig,
    request: &HttpRequest,
) -> Result<Fetch, RemoteError> {
    let mut attempt = 0u32;
    loop {
        let problem = match transport.get(request, config.timeout) {
            Ok(r) if (200..300).contains(&r.status) => return Ok(Fetch::Body(r.body)),
            Ok(r) if r.status == 401 || r.status == 403 => return Err(RemoteError::Credential { status: r.status }),
            Ok(r) if r.status == 429 || r.status >= 500 => format!("HTTP {}", r.status),
            Ok(r) => return Ok(Fetch::Failed(format!("HTTP {}", r.status))),
            Err(e) => e.0,
        };
        if attempt >= config.max_retries {
            return Ok(Fetch::Failed(format!("{problem} after {} attempt(s)", attempt + 1)));
        }
        let wait = config
            .backoff
            .saturating_mul(2u32.saturating_pow(attempt))
            .min(config.max_backoff);
        warn!("{problem} from {}; retrying in {wait:?}", request.url);
        thread::sleep(wait);
        attempt += 1;
    }
}

/// Runs every job and returns the outcome of each, in job order.
fn run_jobs(transport: &dyn Transport, config: &RemoteConfig, jobs: &[Job]) -> Result<Vec<Fetch>, RemoteError> {
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let results: Mutex<Vec<Option<Fetch>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    let fatal: Mutex<Option<RemoteError>> = Mutex::new(None);
    let workers = config.concurrency.clamp(1, jobs.len().max(1));

    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| {
                let mut first = true;
                loop {
                    if abort.load(Ordering::SeqCst) {
                        break;
                    }
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(job) = jobs.get(i) else { break };
                    if !first && !config.delay.is_zero() {
                        thread::sleep(config.delay);
                    }
                    first = false;
                    match fetch_with_retry(transport, config, &job.request) {
                        Ok(fetch) => results.lock().expect("results lock")[i] = Some(fetch),
                        Err(e) => {
                            abort.store(true, Ordering::SeqCst);
                            fatal.lock().expect("error lock").get_or_insert(e);
                            break;
                        }
                    }
                }
            });
        }
    });

    if let Some(e) = fatal.into_inner().expect("error lock") {
        return Err(e);
    }
    Ok(results
        .into_inner()
        .expect("results lock")
        .into_iter()
        .map(|r| r.unwrap_or_else(|| Fetch::Failed("not attempted".into())))
        .collect())
}

/// Acronym from an OBO-style IRI, e.g. `EFO` for `.../EFO_0003777`.
fn acronym_of(iri: &str) -> String {
    let curie = crate::ontology::compact_iri(iri);
    if curie.contains("://") {
        return String::new();
    }
    curie.split_once(':').map(|(p, _)| p.to_string()).unwrap_or_default()
}
