//! Curation sessions: an editable mapping table with per-row versions,
//! persisted as the table's CSV plus a small JSON sidecar.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{FromRequest, Multipart, Path as UrlPath, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use chrono::{DateTime, Utc};
use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use ontomap::engine::{
    mapping_table_bytes, parse_mapping_table, Approval, Mapping, MappingFailure, MappingTable, MappingType, TableError,
};
use ontomap::preprocess::SourceTerm;

use crate::error::ApiError;
use crate::AppState;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("session storage: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("session sidecar: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Sidecar {
    versions: Vec<u64>,
    job: Option<String>,
    created_at: DateTime<Utc>,
    /// Kept here because the CSV only lists unmapped terms that have a row.
    #[serde(default)]
    unmapped: Vec<SourceTerm>,
    #[serde(default)]
    failures: Vec<MappingFailure>,
}

#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    pub table: MappingTable,
    /// One counter per row, bumped on every change to that row.
    pub versions: Vec<u64>,
    /// Job whose ontology backs this session, if any.
    pub job: Option<String>,
    pub created_at: DateTime<Utc>,
}

impl Session {
    pub fn csv(&self) -> Result<Vec<u8>, TableError> {
        mapping_table_bytes(&self.table)
    }
}

#[derive(Debug)]
pub struct SessionStore {
    dir: PathBuf,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
}

fn write_atomically(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(tmp, path)
}

impl SessionStore {
    /// Opens the store at `dir`, loading every session saved there.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, SessionError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let mut sessions = HashMap::new();
        for entry in fs::read_dir(&dir)?.flatten() {
            let path = entry.path();
            if path.extension().is_none_or(|e| e != "csv") {
                continue;
            }
            let Some(id) = path.file_stem().and_then(|s| s.to_str()).map(String::from) else {
                continue;
            };
            match Self::load(&path) {
                Ok(mut session) => {
                    session.id = id.clone();
                    sessions.insert(id, Arc::new(Mutex::new(session)));
                }
                Err(e) => warn!("skipping session {}: {e}", path.display()),
            }
        }
        Ok(SessionStore {
            dir,
            sessions: RwLock::new(sessions),
        })
    }

    fn load(csv: &Path) -> Result<Session, SessionError> {
        let mut table = parse_mapping_table(&fs::read(csv)?)?;
        let sidecar: Option<Sidecar> = fs::read(csv.with_extension("json"))
            .ok()
            .and_then(|b| serde_json::from_slice(&b).ok());
        let (versions, job, created_at) = match sidecar {
            Some(s) if s.versions.len() == table.rows.len() => {
                if !s.unmapped.is_empty() || !s.failures.is_empty() {
                    table.unmapped = s.unmapped;
                    table.failures = s.failures;
                }
                (s.versions, s.job, s.created_at)
            }
            _ => (vec![1; table.rows.len()], None, Utc::now()),
        };
        Ok(Session {
            id: String::new(),
            table,
            versions,
            job,
            created_at,
        })
    }

    fn persist(&self, session: &Session) -> Result<(), SessionError> {
        let sidecar = Sidecar {
            versions: session.versions.clone(),
            job: session.job.clone(),
            created_at: session.created_at,
            unmapped: session.table.unmapped.clone(),
            failures: session.table.failures.clone(),
        };
        write_atomically(
            &self.dir.join(format!("{}.json", session.id)),
            &serde_json::to_vec(&sidecar)?,
        )?;
        write_atomically(&self.dir.join(format!("{}.csv", session.id)), &session.csv()?)?;
        Ok(())
    }

    /// Saves a new session; `id` defaults to a fresh random identifier.
    /// The table is stored as it reads back from CSV, so scores are rounded.
    pub fn create(
        &self,
        table: MappingTable,
        job: Option<String>,
        id: Option<String>,
    ) -> Result<Session, SessionError> {
        let mut reread = parse_mapping_table(&mapping_table_bytes(&table)?)?;
        reread.unmapped = table.unmapped;
        reread.failures = table.failures;
        let table = reread;
        let session = Session {
            id: id.unwrap_or_else(|| uuid::Uuid::new_v4().simple().to_string()),
            versions: vec![1; table.rows.len()],
            table,
            job,
            created_at: Utc::now(),
        };
        self.persist(&session)?;
        self.sessions
            .write()
            .expect("session map poisoned")
            .insert(session.id.clone(), Arc::new(Mutex::new(session.clone())));
        Ok(session)
    }

    pub fn get(&self, id: &str) -> Option<Arc<Mutex<Session>>> {
        self.sessions.read().expect("session map poisoned").get(id).cloned()
    }

    pub fn snapshot(&self, id: &str) -> Option<Session> {
        self.get(id).map(|s| s.lock().expect("session poisoned").clone())
    }

    /// Applies `update` to one row and saves the session.
    pub fn update_row(&self, id: &str, row: usize, update: &RowUpdate) -> Result<RowView, ApiError> {
        let session = self
            .get(id)
            .ok_or_else(|| ApiError::not_found(format!("unknown session '{id}'")))?;
        let mut session = session.lock().expect("session poisoned");
        let mut edited = session.clone();
        apply_update(&mut edited, row, update)?;
        self.persist(&edited).map_err(|e| ApiError::internal(e.to_string()))?;
        *session = edited;
        Ok(RowView::of(&session, row))
    }
}

/// Body of a row PATCH. Every field is optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowUpdate {
    pub mapping_type: Option<String>,
    pub approval: Option<String>,
    /// IRI or CURIE of a lower-ranked alternate to promote to rank 1.
    pub swap_with: Option<String>,
    /// Rejects the update unless the row is still at this version.
    pub version: Option<u64>,
}

fn parse_field<T: std::str::FromStr<Err = String>>(value: &Option<String>) -> Result<Option<T>, ApiError> {
    value
        .as_deref()
        .map(str::parse)
        .transpose()
        .map_err(ApiError::unprocessable)
}

/// Returns the indices of rows that changed.
fn apply_update(session: &mut Session, row: usize, update: &RowUpdate) -> Result<Vec<usize>, ApiError> {
    let rows = session.table.rows.len();
    if row >= rows {
        return Err(ApiError::not_found(format!("row {row} does not exist ({rows} rows)")));
    }
    let mapping_type: Option<MappingType> = parse_field(&update.mapping_type)?;
    let approval: Option<Approval> = parse_field(&update.approval)?;
    if let Some(expected) = update.version {
        let current = session.versions[row];
        if expected != current {
            return Err(ApiError::conflict(format!(
                "row {row} is at version {current}, not {expected}"
            )));
        }
    }

    let mut changed = vec![row];
    if let Some(alternate) = &update.swap_with {
        let other = find_alternate(&session.table.rows, row, alternate)?;
        let table = &mut session.table.rows;
        table.swap(row, other);
        let rank_of_other = table[row].target.as_ref().map_or(0, |t| t.rank);
        if let Some(t) = table[row].target.as_mut() {
            t.rank = 1;
        }
        if let Some(t) = table[other].target.as_mut() {
            t.rank = rank_of_other;
        }
        changed.push(other);
    }
    let target = &mut session.table.rows[row];
    if let Some(m) = mapping_type {
        target.mapping_type = m;
    }
    if let Some(a) = approval {
        target.approval = a;
    }
    for &i in &changed {
        session.versions[i] += 1;
    }
    Ok(changed)
}

/// Index of the alternate named `id` among the lower-ranked rows that follow
/// the rank-1 row at `row`.
fn find_alternate(rows: &[Mapping], row: usize, id: &str) -> Result<usize, ApiError> {
    let head = &rows[row];
    if head.target.as_ref().is_none_or(|t| t.rank != 1) {
        return Err(ApiError::unprocessable(format!("row {row} is not a rank-1 mapping")));
    }
    rows.iter()
        .enumerate()
        .skip(row + 1)
        .take_while(|(_, r)| r.source == head.source && r.target.as_ref().is_some_and(|t| t.rank > 1))
        .find(|(_, r)| r.target.as_ref().is_some_and(|t| t.iri == id || t.curie == id))
        .map(|(i, _)| i)
        .ok_or_else(|| ApiError::unprocessable(format!("'{id}' is not an alternate of row {row}")))
}

#[derive(Debug, Clone, Serialize)]
pub struct RowView {
    pub row: usize,
    pub version: u64,
    #[serde(flatten)]
    pub mapping: Mapping,
}

impl RowView {
    fn of(session: &Session, row: usize) -> Self {
        RowView {
            row,
            version: session.versions[row],
            mapping: session.table.rows[row].clone(),
        }
    }
}

/// Rows of one source term: the first is rank 1, the rest its alternates.
#[derive(Debug, Clone, Serialize)]
pub struct TermGroup {
    pub source: SourceTerm,
    pub rows: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SessionView {
    pub session_id: String,
    pub job: Option<String>,
    pub created_at: DateTime<Utc>,
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<RowView>,
    pub terms: Vec<TermGroup>,
    pub unmapped: Vec<SourceTerm>,
    pub failures: Vec<MappingFailure>,
}

impl From<&Session> for SessionView {
    fn from(session: &Session) -> Self {
        let mut terms = Vec::new();
        let mut start = 0;
        for group in session.table.groups() {
            terms.push(TermGroup {
                source: group[0].source.clone(),
                rows: (start..start + group.len()).collect(),
            });
            start += group.len();
        }
        SessionView {
            session_id: session.id.clone(),
            job: session.job.clone(),
            created_at: session.created_at,
            metadata: session.table.metadata.clone(),
            rows: (0..session.table.rows.len()).map(|i| RowView::of(session, i)).collect(),
            terms,
            unmapped: session.table.unmapped.clone(),
            failures: session.table.failures.clone(),
        }
    }
}

pub fn csv_response(session: &Session) -> Result<Response, ApiError> {
    let bytes = session.csv().map_err(|e| ApiError::internal(e.to_string()))?;
    Ok((
        [
            (header::CONTENT_TYPE, "text/csv; charset=utf-8".to_string()),
            (
                header::CONTENT_DISPOSITION,
                format!("attachment; filename=\"mappings-{}.csv\"", session.id),
            ),
        ],
        bytes,
    )
        .into_response())
}

fn lookup(state: &AppState, id: &str) -> Result<Session, ApiError> {
    state
        .sessions
        .snapshot(id)
        .ok_or_else(|| ApiError::not_found(format!("unknown session '{id}'")))
}

#[derive(Debug, Deserialize)]
pub struct ResumeQuery {
    job: Option<String>,
}

/// Accepts the table either as the raw request body or as the first file
/// part of a multipart form.
async fn uploaded_table(request: Request) -> Result<Bytes, ApiError> {
    let multipart = request
        .headers()
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("multipart/form-data"));
    if multipart {
        let mut form = Multipart::from_request(request, &()).await?;
        while let Some(field) = form.next_field().await? {
            if field.file_name().is_some() || field.name() == Some("table") {
                return Ok(field.bytes().await?);
            }
        }
        Err(ApiError::bad_request("no mapping table in the upload"))
    } else {
        Ok(Bytes::from_request(request, &()).await?)
    }
}

pub async fn resume(
    State(state): State<Arc<AppState>>,
    Query(query): Query<ResumeQuery>,
    request: Request,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let bytes = uploaded_table(request).await?;
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Err(ApiError::bad_request("the uploaded mapping table is empty"));
    }
    let table = parse_mapping_table(&bytes).map_err(|e| ApiError::bad_request(e.to_string()))?;
    if let Some(job) = &query.job {
        state.jobs.view(job)?;
    }
    let session = tokio::task::spawn_blocking(move || state.sessions.create(table, query.job, None))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map_err(|e| ApiError::internal(e.to_string()))?;
    Ok((StatusCode::CREATED, Json(SessionView::from(&session))))
}

pub async fn show(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> Result<Json<SessionView>, ApiError> {
    Ok(Json(SessionView::from(&lookup(&state, &id)?)))
}

pub async fn csv(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Response, ApiError> {
    csv_response(&lookup(&state, &id)?)
}

pub async fn update_row(
    State(state): State<Arc<AppState>>,
    UrlPath((id, row)): UrlPath<(String, String)>,
    body: Result<Json<RowUpdate>, axum::extract::rejection::JsonRejection>,
) -> Result<Json<RowView>, ApiError> {
    let row: usize = row
        .parse()
        .map_err(|_| ApiError::not_found(format!("row '{row}' does not exist")))?;
    let Json(update) = body?;
    let view = tokio::task::spawn_blocking(move || state.sessions.update_row(&id, row, &update))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))??;
    Ok(Json(view))
}
