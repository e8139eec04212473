use std::path::Path;
use std::time::Duration;

use super::{parse_obograph, parse_term_table, IngestError, Ontology};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OntologyFormat {
    ObographJson,
    TermTable(char),
}

impl OntologyFormat {
    /// Guesses the format from the locator's extension, then from content.
    pub fn detect(locator: &str, bytes: &[u8]) -> Option<OntologyFormat> {
        let lower = locator.split(['?', '#']).next().unwrap_or(locator).to_ascii_lowercase();
        if lower.ends_with(".json") {
            return Some(OntologyFormat::ObographJson);
        }
        if lower.ends_with(".tsv") || lower.ends_with(".tab") {
            return Some(OntologyFormat::TermTable('\t'));
        }
        if lower.ends_with(".csv") {
            return Some(OntologyFormat::TermTable(','));
        }
        match bytes.iter().find(|b| !b.is_ascii_whitespace()) {
            Some(b'{') => Some(OntologyFormat::ObographJson),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub timeout: Duration,
    /// Overrides format detection.
    pub format: Option<OntologyFormat>,
    /// Rejects documents larger than this many bytes.
    pub max_bytes: Option<usize>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            timeout: Duration::from_secs(120),
            format: None,
            max_bytes: None,
        }
    }
}

fn is_url(locator: &str) -> bool {
    locator.starts_with("http://") || locator.starts_with("https://")
}

/// Reads raw bytes from a local path or an http(s) URL.
pub fn read_locator(locator: &str, timeout: Duration) -> Result<Vec<u8>, IngestError> {
    let retrieve_err = |message: String| IngestError::Retrieve {
        locator: locator.to_string(),
        message,
    };
    if is_url(locator) {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| retrieve_err(e.to_string()))?;
        let response = client
            .get(locator)
            .send()
            .and_then(|r| r.error_for_status())
            .map_err(|e| retrieve_err(e.to_string()))?;
        Ok(response.bytes().map_err(|e| retrieve_err(e.to_string()))?.to_vec())
    } else {
        std::fs::read(locator).map_err(|e| retrieve_err(e.to_string()))
    }
}

fn acronym_from_locator(locator: &str) -> String {
    let name = locator.rsplit(['/', '\\']).next().unwrap_or(locator);
    let stem = Path::new(name).file_stem().and_then(|s| s.to_str()).unwrap_or(name);
    let stem = stem.split('.').next().unwrap_or(stem);
    stem.to_ascii_uppercase()
}

/// Loads and parses an ontology from a path or URL.
pub fn load_ontology(locator: &str, options: &LoadOptions) -> Result<Ontology, IngestError> {
    let bytes = read_locator(locator, options.timeout)?;
    parse_ontology_bytes(locator, &bytes, options)
}

/// Parses an already retrieved document. `locator` names the source and
/// guides format detection.
pub fn parse_ontology_bytes(locator: &str, bytes: &[u8], options: &LoadOptions) -> Result<Ontology, IngestError> {
    if let Some(limit) = options.max_bytes.filter(|&limit| bytes.len() > limit) {
        return Err(IngestError::TooLarge {
            locator: locator.to_string(),
            limit,
        });
    }
    let format = options
        .format
        .or_else(|| OntologyFormat::detect(locator, bytes))
        .ok_or_else(|| IngestError::UnsupportedFormat(locator.to_string()))?;
    let mut ontology = match format {
        OntologyFormat::ObographJson => parse_obograph(bytes)?,
        OntologyFormat::TermTable(sep) => parse_term_table(bytes, sep)?,
    };
    ontology.acronym = acronym_from_locator(locator);
    ontology.source_locator = locator.to_string();
    Ok(ontology)
}
