//! Job submission and execution.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Multipart, Path, State};
use axum::http::StatusCode;
use axum::response::Response;
use axum::Json;
use chrono::{DateTime, Utc};
use log::{info, warn};
use serde::Serialize;

use ontomap::engine::{
    export_term_graphs, map_terms_remote, map_terms_with_ontology, read_source_terms, MappingConfig, MappingTable,
    SourceInput, TermGraphs,
};
use ontomap::ontology::{load_ontology, parse_ontology_bytes, LoadOptions};
use ontomap::preprocess::{parse_pattern_file, Blocklist, RegexTemplates, SourceTerm};
use ontomap::remote::ReqwestTransport;

use crate::error::ApiError;
use crate::sessions::{csv_response, SessionView};
use crate::{AppState, LoadedOntology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
}

/// Where a job's ontology comes from.
#[derive(Debug, Clone)]
pub enum Target {
    Upload {
        name: String,
        bytes: Bytes,
    },
    Url(String),
    Cached(String),
    /// Acronym list for a remote mapper.
    Remote(String),
}

impl Target {
    fn describe(&self) -> String {
        match self {
            Target::Upload { name, .. } => name.clone(),
            Target::Url(s) | Target::Cached(s) | Target::Remote(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Job {
    pub id: String,
    pub status: JobStatus,
    pub target: String,
    pub mapper: String,
    pub source_terms: usize,
    pub submitted_at: DateTime<Utc>,
    pub started_at: Option<DateTime<Utc>>,
    pub finished_at: Option<DateTime<Utc>>,
    pub error: Option<String>,
    pub ontology: Option<Arc<LoadedOntology>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct JobView {
    pub job_id: String,
    pub status: JobStatus,
    pub target: String,
    pub mapper: String,
    pub source_terms: usize,
    pub submitted_at: DateTime<Utc>,
    pub started_at: Option<DateTime<Utc>>,
    pub finished_at: Option<DateTime<Utc>>,
    pub error: Option<String>,
}

impl From<&Job> for JobView {
    fn from(job: &Job) -> Self {
        JobView {
            job_id: job.id.clone(),
            status: job.status,
            target: job.target.clone(),
            mapper: job.mapper.clone(),
            source_terms: job.source_terms,
            submitted_at: job.submitted_at,
            started_at: job.started_at,
            finished_at: job.finished_at,
            error: job.error.clone(),
        }
    }
}

#[derive(Debug, Default)]
pub struct JobStore {
    jobs: RwLock<HashMap<String, Job>>,
}

impl JobStore {
    fn insert(&self, job: Job) {
        self.jobs.write().expect("job map poisoned").insert(job.id.clone(), job);
    }

    fn update(&self, id: &str, f: impl FnOnce(&mut Job)) {
        if let Some(job) = self.jobs.write().expect("job map poisoned").get_mut(id) {
            f(job);
        }
    }

    pub fn get(&self, id: &str) -> Option<Job> {
        self.jobs.read().expect("job map poisoned").get(id).cloned()
    }

    pub fn view(&self, id: &str) -> Result<JobView, ApiError> {
        self.get(id)
            .map(|j| JobView::from(&j))
            .ok_or_else(|| ApiError::not_found(format!("unknown job '{id}'")))
    }

    /// The job, provided it finished successfully.
    pub fn finished(&self, id: &str) -> Result<Job, ApiError> {
        let job = self
            .get(id)
            .ok_or_else(|| ApiError::not_found(format!("unknown job '{id}'")))?;
        match job.status {
            JobStatus::Done => Ok(job),
            JobStatus::Failed => Err(ApiError::conflict(format!(
                "job '{id}' failed: {}",
                job.error.as_deref().unwrap_or("unknown error")
            ))),
            status => Err(ApiError::conflict(
                format!("job '{id}' is {status:?}, not done").to_lowercase(),
            )),
        }
    }
}

/// A validated job request.
#[derive(Debug, Clone)]
pub struct Submission {
    pub terms: Vec<SourceTerm>,
    pub target: Target,
    pub config: MappingConfig,
}

fn invalid(field: &str, value: &str, reason: impl std::fmt::Display) -> ApiError {
    ApiError::bad_request(format!("field '{field}': invalid value '{value}': {reason}"))
}

fn parse<T: std::str::FromStr>(field: &str, value: &str) -> Result<T, ApiError>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e| invalid(field, value, e))
}

fn flag(field: &str, value: &str) -> Result<bool, ApiError> {
    match value.trim().to_ascii_lowercase().as_str() {
        "" | "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(invalid(field, value, "expected true or false")),
    }
}

fn single_char(field: &str, value: &str) -> Result<char, ApiError> {
    let value = match value {
        "\\t" | "tab" => "\t",
        other => other,
    };
    let mut chars = value.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(invalid(field, value, "expected a single character")),
    }
}

fn text(field: &str, bytes: Bytes) -> Result<String, ApiError> {
    String::from_utf8(bytes.to_vec()).map_err(|_| ApiError::bad_request(format!("field '{field}' is not valid UTF-8")))
}

fn is_url(s: &str) -> bool {
    s.starts_with("http://") || s.starts_with("https://")
}

/// Reads and validates the multipart form of a job submission.
pub async fn read_submission(state: &AppState, mut form: Multipart) -> Result<Submission, ApiError> {
    let mut config = MappingConfig::default();
    let mut source: Option<String> = None;
    let mut upload: Option<(String, Bytes)> = None;
    let mut target: Option<String> = None;

    while let Some(field) = form.next_field().await? {
        let name = field.name().unwrap_or_default().to_string();
        let file_name = field.file_name().map(String::from);
        let bytes = field.bytes().await?;
        if name == "ontology_file" {
            upload = Some((file_name.unwrap_or_else(|| "upload".into()), bytes));
            continue;
        }
        let value = text(&name, bytes)?;
        let v = value.as_str();
        match name.as_str() {
            "source_file" | "source_text" => source = Some(value),
            "target" => target = Some(v.trim().to_string()),
            "mapper" => config.mapper = parse(&name, v)?,
            "max_mappings" | "top" => config.max_mappings = parse(&name, v)?,
            "min_score" => config.min_score = parse(&name, v)?,
            "excl_deprecated" => config.excl_deprecated = flag(&name, v)?,
            "incl_unmapped" => config.incl_unmapped = flag(&name, v)?,
            "use_cache" => config.use_cache = flag(&name, v)?,
            "include_broad_synonyms" | "broad_synonyms" => config.include_broad_synonyms = flag(&name, v)?,
            "base_iris" => {
                config.base_iris = v
                    .split([',', '\n'])
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect()
            }
            "term_type" => config.term_type = parse(&name, v)?,
            "ngram_size" => config.ngram_size = parse(&name, v)?,
            "csv_column" => config.csv_column = Some(v.trim().to_string()).filter(|s| !s.is_empty()),
            "source_terms_ids_column" | "ids_column" => {
                config.source_terms_ids_column = Some(v.trim().to_string()).filter(|s| !s.is_empty())
            }
            "separator" => config.separator = single_char(&name, v)?,
            "blocklist" => {
                config.blocklist = parse_pattern_file(v);
                Blocklist::compile(&config.blocklist).map_err(|e| invalid(&name, v, e))?;
            }
            "templates" => {
                config.templates = parse_pattern_file(v);
                RegexTemplates::compile(&config.templates).map_err(|e| invalid(&name, v, e))?;
            }
            "api_key" => config.remote.api_key = Some(v.trim().to_string()).filter(|s| !s.is_empty()),
            other => return Err(ApiError::bad_request(format!("unknown field '{other}'"))),
        }
    }

    config.validate().map_err(ApiError::bad_request)?;
    if config.source_terms_ids_column.is_some() && config.csv_column.is_none() {
        return Err(ApiError::bad_request(
            "field 'source_terms_ids_column' needs 'csv_column'",
        ));
    }
    let source = source.ok_or_else(|| ApiError::bad_request("missing field 'source_file' or 'source_text'"))?;
    let terms = read_source_terms(&SourceInput::Text(source), &config)
        .map_err(|e| ApiError::bad_request(format!("source: {e}")))?;

    let target = match (upload, target) {
        (Some(_), _) if config.mapper.is_remote() => {
            return Err(ApiError::bad_request(format!(
                "field 'ontology_file': the {} mapper takes ontology acronyms in 'target'",
                config.mapper
            )))
        }
        (Some((name, bytes)), _) => Target::Upload { name, bytes },
        (None, None) => return Err(ApiError::bad_request("missing field 'ontology_file' or 'target'")),
        (None, Some(t)) if t.is_empty() => return Err(ApiError::bad_request("field 'target' is empty")),
        (None, Some(t)) if config.mapper.is_remote() => Target::Remote(t),
        (None, Some(t)) if config.use_cache => {
            if !state.cache.contains(&t) {
                return Err(ApiError::bad_request(format!(
                    "field 'target': no cached ontology named '{t}'"
                )));
            }
            Target::Cached(t)
        }
        (None, Some(t)) if is_url(&t) => Target::Url(t),
        (None, Some(t)) => {
            return Err(ApiError::bad_request(format!(
                "field 'target': '{t}' is not an http(s) URL; upload the file as 'ontology_file' or set use_cache"
            )))
        }
    };
    Ok(Submission { terms, target, config })
}

/// Runs a submission to completion on the current thread.
pub fn execute(
    state: &AppState,
    submission: Submission,
) -> Result<(MappingTable, Option<Arc<LoadedOntology>>), String> {
    let Submission { terms, target, config } = submission;
    let options = LoadOptions {
        max_bytes: Some(state.config.max_ontology_bytes),
        ..LoadOptions::default()
    };
    let loaded = match target {
        Target::Remote(acronyms) => {
            // the blocking client must be created and dropped off the async runtime
            let table = match &state.transport {
                Some(transport) => map_terms_remote(terms, &acronyms, &config, transport.as_ref()),
                None => map_terms_remote(terms, &acronyms, &config, &ReqwestTransport::new()),
            }
            .map_err(|e| e.to_string())?;
            return Ok((table, None));
        }
        Target::Upload { name, bytes } => Arc::new(LoadedOntology::new(
            parse_ontology_bytes(&name, &bytes, &options).map_err(|e| e.to_string())?,
        )),
        Target::Url(url) => Arc::new(LoadedOntology::new(
            load_ontology(&url, &options).map_err(|e| e.to_string())?,
        )),
        Target::Cached(acronym) => state.cached_ontology(&acronym).map_err(|e| e.to_string())?,
    };
    let table = map_terms_with_ontology(terms, &loaded.ontology, &config).map_err(|e| e.to_string())?;
    Ok((table, Some(loaded)))
}

fn run(state: &AppState, id: &str, submission: Submission) {
    state.jobs.update(id, |j| {
        j.status = JobStatus::Running;
        j.started_at = Some(Utc::now());
    });
    let outcome = execute(state, submission).and_then(|(table, ontology)| {
        state
            .sessions
            .create(table, Some(id.to_string()), Some(id.to_string()))
            .map(|_| ontology)
            .map_err(|e| e.to_string())
    });
    match &outcome {
        Ok(_) => info!("job {id} done"),
        Err(e) => warn!("job {id} failed: {e}"),
    }
    state.jobs.update(id, |j| {
        j.finished_at = Some(Utc::now());
        match outcome {
            Ok(ontology) => {
                j.status = JobStatus::Done;
                j.ontology = ontology;
            }
            Err(e) => {
                j.status = JobStatus::Failed;
                j.error = Some(e);
            }
        }
    });
}

/// Queues a submission and returns its job id.
pub fn spawn(state: Arc<AppState>, submission: Submission) -> String {
    let id = uuid::Uuid::new_v4().simple().to_string();
    state.jobs.insert(Job {
        id: id.clone(),
        status: JobStatus::Queued,
        target: submission.target.describe(),
        mapper: submission.config.mapper.to_string(),
        source_terms: submission.terms.len(),
        submitted_at: Utc::now(),
        started_at: None,
        finished_at: None,
        error: None,
        ontology: None,
    });
    let job_id = id.clone();
    tokio::spawn(async move {
        let _permit = state.workers.clone().acquire_owned().await.expect("worker pool closed");
        let worker = state.clone();
        let id = job_id.clone();
        if let Err(e) = tokio::task::spawn_blocking(move || run(&worker, &id, submission)).await {
            state.jobs.update(&job_id, |j| {
                j.status = JobStatus::Failed;
                j.finished_at = Some(Utc::now());
                j.error = Some(format!("job crashed: {e}"));
            });
        }
    });
    id
}

#[derive(Debug, Serialize)]
pub struct Accepted {
    pub job_id: String,
}

pub async fn submit(
    State(state): State<Arc<AppState>>,
    form: Result<Multipart, axum::extract::multipart::MultipartRejection>,
) -> Result<(StatusCode, Json<Accepted>), ApiError> {
    let submission = read_submission(&state, form?).await?;
    let job_id = spawn(state, submission);
    Ok((StatusCode::ACCEPTED, Json(Accepted { job_id })))
}

pub async fn status(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<JobView>, ApiError> {
    state.jobs.view(&id).map(Json)
}

fn session_of(state: &AppState, id: &str) -> Result<crate::sessions::Session, ApiError> {
    state.jobs.finished(id)?;
    state
        .sessions
        .snapshot(id)
        .ok_or_else(|| ApiError::internal(format!("job '{id}' has no session")))
}

pub async fn result(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    Ok(Json(SessionView::from(&session_of(&state, &id)?)))
}

pub async fn result_csv(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    csv_response(&session_of(&state, &id)?)
}

pub async fn graphs(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<TermGraphs>, ApiError> {
    let job = state.jobs.finished(&id)?;
    let loaded = job
        .ontology
        .ok_or_else(|| ApiError::conflict(format!("job '{id}' used a remote mapper and has no local ontology")))?;
    let session = session_of(&state, &id)?;
    Ok(Json(export_term_graphs(
        &session.table,
        &loaded.ontology,
        &loaded.hierarchy,
    )))
}
