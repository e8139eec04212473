//! On-disk cache of processed ontologies, keyed by acronym.
//!
//! Layout: `<root>/<ACRONYM>/manifest.txt` plus a versioned term table
//! (`terms-<stamp>.tsv`) that the manifest points at. A new version is written
//! in full before the manifest is replaced by rename, so readers only ever see
//! a complete entry.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use chrono::{DateTime, Utc};
use log::warn;
use thiserror::Error;

use crate::ontology::{load_ontology, parse_term_table, write_term_table, IngestError, LoadOptions, Ontology};

/// Environment variable naming the cache root.
pub const CACHE_DIR_ENV: &str = "ONTOMAP_CACHE_DIR";

const MANIFEST: &str = "manifest.txt";

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("invalid acronym '{0}': use letters, digits, '_' or '-'")]
    InvalidAcronym(String),
    #[error("no cached ontology '{acronym}' (available: {})", available.join(", "))]
    NotFound { acronym: String, available: Vec<String> },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("cache entry '{acronym}' is corrupt: {message}")]
    Corrupt { acronym: String, message: String },
    #[error("cache I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("ontology table: {0}")]
    Table(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheEntry {
    pub acronym: String,
    pub path: PathBuf,
    pub created_at: DateTime<Utc>,
    pub source_locator: String,
    pub term_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheFailure {
    pub acronym: String,
    pub locator: String,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct CacheSetReport {
    pub entries: Vec<CacheEntry>,
    pub failures: Vec<CacheFailure>,
    pub warnings: Vec<String>,
}

pub fn valid_acronym(acronym: &str) -> bool {
    !acronym.is_empty()
        && acronym
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

#[derive(Debug, Clone)]
pub struct CacheStore {
    root: PathBuf,
    load_options: LoadOptions,
}

static COUNTER: AtomicU64 = AtomicU64::new(0);

fn unique_stamp() -> String {
    let nanos = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_nanos())
        .unwrap_or_default();
    format!(
        "{nanos}-{}-{}",
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::Relaxed)
    )
}

fn escape(value: &str) -> String {
    value.replace('\\', "\\\\").replace('\n', "\\n")
}

fn unescape(value: &str) -> String {
    let mut out = String::new();
    let mut chars = value.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some(other) => out.push(other),
                None => {}
            }
        } else {
            out.push(c);
        }
    }
    out
}

fn write_atomically(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let tmp = dir.join(format!(".tmp-{}", unique_stamp()));
    let mut file = fs::File::create(&tmp)?;
    file.write_all(bytes)?;
    file.sync_all()?;
    fs::rename(&tmp, path)
}

impl CacheStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        CacheStore {
            root: root.into(),
            load_options: LoadOptions::default(),
        }
    }

    /// Cache rooted at `$ONTOMAP_CACHE_DIR`, or `.ontomap-cache` in the
    /// working directory.
    pub fn from_env() -> Self {
        CacheStore::new(
            std::env::var_os(CACHE_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| ".ontomap-cache".into()),
        )
    }

    pub fn with_load_options(mut self, options: LoadOptions) -> Self {
        self.load_options = options;
        self
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Parses the ontology at `locator` and stores it under `acronym`,
    /// replacing any previous entry.
    pub fn cache_ontology(&self, locator: &str, acronym: &str) -> Result<CacheEntry, CacheError> {
        if !valid_acronym(acronym) {
            return Err(CacheError::InvalidAcronym(acronym.to_string()));
        }
        let ontology = load_ontology(locator, &self.load_options)?;
        self.store(&ontology, locator, acronym)
    }

    /// Stores an already parsed ontology.
    pub fn store(&self, ontology: &Ontology, locator: &str, acronym: &str) -> Result<CacheEntry, CacheError> {
        if !valid_acronym(acronym) {
            return Err(CacheError::InvalidAcronym(acronym.to_string()));
        }
        let dir = self.root.join(acronym);
        fs::create_dir_all(&dir)?;
        let table = write_term_table(ontology, '\t').map_err(|e| CacheError::Table(e.to_string()))?;
        let store_name = format!("terms-{}.tsv", unique_stamp());
        write_atomically(&dir.join(&store_name), &table)?;

        let created_at = Utc::now();
        let mut manifest = String::new();
        let fields: [(&str, String); 6] = [
            ("acronym", acronym.to_string()),
            ("source_locator", locator.to_string()),
            ("created_at", created_at.to_rfc3339()),
            ("term_count", ontology.len().to_string()),
            ("version_info", ontology.version_info.clone().unwrap_or_default()),
            ("store", store_name.clone()),
        ];
        for (k, v) in fields {
            manifest.push_str(&format!("{k}: {}\n", escape(&v)));
        }
        write_atomically(&dir.join(MANIFEST), manifest.as_bytes())?;
        self.remove_stale_stores(&dir);

        Ok(CacheEntry {
            acronym: acronym.to_string(),
            path: dir,
            created_at,
            source_locator: locator.to_string(),
            term_count: ontology.len(),
        })
    }

    fn remove_stale_stores(&self, dir: &Path) {
        let current = match read_manifest(&dir.join(MANIFEST)) {
            Ok(m) => m.get("store").cloned().unwrap_or_default(),
            Err(_) => return,
        };
        let Ok(listing) = fs::read_dir(dir) else { return };
        for entry in listing.flatten() {
            let name = entry.file_name().to_string_lossy().into_owned();
            if !(name.starts_with("terms-") || name.starts_with(".tmp-")) || name == current {
                continue;
            }
            // Leave recent files alone: a concurrent writer may be about to
            // publish them.
            let age = entry
                .metadata()
                .and_then(|m| m.modified())
                .ok()
                .and_then(|t| t.elapsed().ok())
                .unwrap_or_default();
            if age > Duration::from_secs(60) {
                let _ = fs::remove_file(entry.path());
            }
        }
    }

    /// Caches each `(acronym, locator)` row. Failures are isolated per row;
    /// when an acronym repeats, only its last row is used.
    pub fn cache_ontology_set(&self, rows: &[(String, String)]) -> CacheSetReport {
        let mut report = CacheSetReport::default();
        let mut last: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, (acronym, _)) in rows.iter().enumerate() {
            if let Some(prev) = last.insert(acronym.as_str(), i) {
                let msg = format!(
                    "acronym '{acronym}' appears more than once; row {} replaces row {}",
                    i + 1,
                    prev + 1
                );
                warn!("{msg}");
                report.warnings.push(msg);
            }
        }
        for (i, (acronym, locator)) in rows.iter().enumerate() {
            if last.get(acronym.as_str()) != Some(&i) {
                continue;
            }
            match self.cache_ontology(locator, acronym) {
                Ok(entry) => report.entries.push(entry),
                Err(e) => report.failures.push(CacheFailure {
                    acronym: acronym.clone(),
                    locator: locator.clone(),
                    message: e.to_string(),
                }),
            }
        }
        report
    }

    pub fn entry(&self, acronym: &str) -> Result<CacheEntry, CacheError> {
        let dir = self.root.join(acronym);
        let manifest = match valid_acronym(acronym).then(|| read_manifest(&dir.join(MANIFEST))) {
            Some(Ok(m)) => m,
            _ => {
                return Err(CacheError::NotFound {
                    acronym: acronym.to_string(),
                    available: self.list().into_iter().map(|e| e.acronym).collect(),
                })
            }
        };
        let corrupt = |message: String| CacheError::Corrupt {
            acronym: acronym.to_string(),
            message,
        };
        let created_at = manifest
            .get("created_at")
            .and_then(|v| DateTime::parse_from_rfc3339(v).ok())
            .map(|d| d.with_timezone(&Utc))
            .ok_or_else(|| corrupt("bad created_at".into()))?;
        let term_count = manifest
            .get("term_count")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| corrupt("bad term_count".into()))?;
        Ok(CacheEntry {
            acronym: acronym.to_string(),
            path: dir,
            created_at,
            source_locator: manifest.get("source_locator").cloned().unwrap_or_default(),
            term_count,
        })
    }

    pub fn contains(&self, acronym: &str) -> bool {
        valid_acronym(acronym) && self.root.join(acronym).join(MANIFEST).is_file()
    }

    /// All readable entries, sorted by acronym.
    pub fn list(&self) -> Vec<CacheEntry> {
        let Ok(listing) = fs::read_dir(&self.root) else {
            return Vec::new();
        };
        let mut names: Vec<String> = listing
            .flatten()
            .filter(|e| e.path().join(MANIFEST).is_file())
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .collect();
        names.sort();
        names.iter().filter_map(|n| self.entry(n).ok()).collect()
    }

    pub fn load_cached(&self, acronym: &str) -> Result<Ontology, CacheError> {
        let entry = self.entry(acronym)?;
        let manifest = read_manifest(&entry.path.join(MANIFEST))?;
        let corrupt = |message: String| CacheError::Corrupt {
            acronym: acronym.to_string(),
            message,
        };
        let store = manifest
            .get("store")
            .filter(|s| !s.contains(['/', '\\']))
            .ok_or_else(|| corrupt("manifest has no store".into()))?;
        let bytes = fs::read(entry.path.join(store))?;
        let mut ontology = parse_term_table(&bytes, '\t')?;
        if ontology.len() != entry.term_count {
            return Err(corrupt(format!(
                "manifest lists {} terms, store has {}",
                entry.term_count,
                ontology.len()
            )));
        }
        ontology.acronym = acronym.to_string();
        ontology.source_locator = entry.source_locator;
        ontology.version_info = manifest.get("version_info").filter(|v| !v.is_empty()).cloned();
        Ok(ontology)
    }
}

fn read_manifest(path: &Path) -> std::io::Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)?;
    Ok(text
        .lines()
        .filter_map(|line| line.split_once(": "))
        .map(|(k, v)| (k.trim().to_string(), unescape(v)))
        .collect())
}

/// Reads an `(acronym, locator)` table. The header must name an `acronym`
/// column and one of `locator`, `url` or `path`.
pub fn read_cache_table(bytes: &[u8], separator: char) -> Result<Vec<(String, String)>, CacheError> {
    let sep = u8::try_from(separator as u32).map_err(|_| CacheError::Table("separator must be ASCII".into()))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(sep)
        .flexible(true)
        .from_reader(bytes);
    let headers = reader.headers().map_err(|e| CacheError::Table(e.to_string()))?.clone();
    let find = |names: &[&str]| {
        headers
            .iter()
            .position(|h| names.iter().any(|n| h.trim().eq_ignore_ascii_case(n)))
    };
    let acronym_col = find(&["acronym", "name"]).ok_or_else(|| CacheError::Table("missing 'acronym' column".into()))?;
    let locator_col =
        find(&["locator", "url", "path", "iri"]).ok_or_else(|| CacheError::Table("missing 'locator' column".into()))?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CacheError::Table(e.to_string()))?;
        let acronym = record.get(acronym_col).unwrap_or("").trim().to_string();
        let locator = record.get(locator_col).unwrap_or("").trim().to_string();
        if acronym.is_empty() && locator.is_empty() {
            continue;
        }
        rows.push((acronym, locator));
    }
    if rows.is_empty() {
        return Err(CacheError::Table("table has no rows".into()));
    }
    Ok(rows)
}
