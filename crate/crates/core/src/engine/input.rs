use std::path::{Path, PathBuf};

use thiserror::Error;

use super::config::MappingConfig;
use crate::preprocess::SourceTerm;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("input contains no terms")]
    Empty,
    #[error("column '{column}' not found; available columns: {}", available.join(", "))]
    MissingColumn { column: String, available: Vec<String> },
    #[error("separator {0:?} is not a single ASCII character")]
    Separator(char),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("table input: {0}")]
    Csv(#[from] csv::Error),
}

/// Where source terms come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceInput {
    File(PathBuf),
    Text(String),
    Terms(Vec<String>),
}

impl SourceInput {
    pub fn file(path: impl AsRef<Path>) -> Self {
        SourceInput::File(path.as_ref().to_path_buf())
    }
}

/// Reads source terms. With `csv_column` set the input is a table split by
/// `separator`; otherwise each non-blank line is one term. Duplicates are kept.
pub fn read_source_terms(input: &SourceInput, config: &MappingConfig) -> Result<Vec<SourceTerm>, InputError> {
    let text = match input {
        SourceInput::Terms(list) => {
            let terms: Vec<SourceTerm> = list
                .iter()
                .filter(|t| !t.trim().is_empty())
                .map(|t| SourceTerm::new(t.trim()))
                .collect();
            return if terms.is_empty() {
                Err(InputError::Empty)
            } else {
                Ok(terms)
            };
        }
        SourceInput::Text(text) => text.clone(),
        SourceInput::File(path) => std::fs::read_to_string(path).map_err(|source| InputError::Io {
            path: path.clone(),
            source,
        })?,
    };
    let text = text.strip_prefix('\u{feff}').unwrap_or(&text);
    let terms = match &config.csv_column {
        Some(column) => read_table(
            text,
            column,
            config.source_terms_ids_column.as_deref(),
            config.separator,
        )?,
        None => text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(SourceTerm::new)
            .collect(),
    };
    if terms.is_empty() {
        return Err(InputError::Empty);
    }
    Ok(terms)
}

fn read_table(text: &str, column: &str, ids: Option<&str>, separator: char) -> Result<Vec<SourceTerm>, InputError> {
    let delimiter = u8::try_from(separator as u32)
        .ok()
        .filter(u8::is_ascii)
        .ok_or(InputError::Separator(separator))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let position = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| InputError::MissingColumn {
                column: name.to_string(),
                available: headers.clone(),
            })
    };
    let value_at = position(column)?;
    let id_at = ids.map(position).transpose()?;

    let mut terms = Vec::new();
    for record in reader.records() {
        let record = record?;
        let value = record.get(value_at).unwrap_or("").trim();
        if value.is_empty() {
            continue;
        }
        let mut term = SourceTerm::new(value);
        if let Some(id) = id_at
            .and_then(|i| record.get(i))
            .map(str::trim)
            .filter(|s| !s.is_empty())
        {
            term = term.with_id(id);
        }
        terms.push(term);
    }
    Ok(terms)
}
