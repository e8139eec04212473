use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{Approval, Mapper, MappingType};
use crate::ontology::{join_values, split_values};
use crate::preprocess::{SourceTerm, UNMAPPED_TAG};

pub const HEADER: [&str; 12] = [
    "Source Term",
    "Source Term ID",
    "Tags",
    "Mapped Term Label",
    "Mapped Term CURIE",
    "Mapped Term IRI",
    "Mapping Score",
    "Rank",
    "Mapper",
    "Matched String",
    "Mapping Type",
    "Approval",
];

#[derive(Debug, Error)]
pub enum TableError {
    #[error("line {line}: {message}")]
    Format { line: u64, message: String },
    #[error("metadata key '{0}' must be non-empty and contain no ':' or line break")]
    MetadataKey(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappedTerm {
    pub iri: String,
    pub curie: String,
    pub label: String,
    pub score: f64,
    /// 1-based position among this source term's mappings.
    pub rank: usize,
    pub matched_string: String,
}

/// One output row. Rows for ignored or unmapped source terms have no target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mapping {
    pub source: SourceTerm,
    pub target: Option<MappedTerm>,
    pub mapper: Mapper,
    pub mapping_type: MappingType,
    pub approval: Approval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingFailure {
    pub source: SourceTerm,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MappingTable {
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<Mapping>,
    /// Non-ignored source terms that received no mapping.
    pub unmapped: Vec<SourceTerm>,
    /// Source terms whose matcher call failed; they are also unmapped.
    pub failures: Vec<MappingFailure>,
}

impl MappingTable {
    pub fn metadata_value(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Rows grouped by consecutive source term, in output order.
    pub fn groups(&self) -> Vec<&[Mapping]> {
        let mut groups = Vec::new();
        let mut start = 0;
        for i in 1..=self.rows.len() {
            if i == self.rows.len() || !same_source(&self.rows[i - 1], &self.rows[i]) {
                if i > start {
                    groups.push(&self.rows[start..i]);
                }
                start = i;
            }
        }
        groups
    }
}

/// Rows of one source term are contiguous and ranked from 1.
fn same_source(prev: &Mapping, next: &Mapping) -> bool {
    prev.source == next.source && next.target.as_ref().is_some_and(|t| t.rank > 1)
}

fn escape_meta(value: &str) -> String {
    value.replace('\\', "\\\\").replace('\n', "\\n").replace('\r', "\\r")
}

fn unescape_meta(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    let mut chars = value.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some('r') => out.push('\r'),
                Some(other) => out.push(other),
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

pub fn format_score(score: f64) -> String {
    format!("{score:.3}")
}

/// Serializes a table: `# key: value` lines, the header row, then one
/// record per mapping.
pub fn write_mapping_table_to<W: Write>(table: &MappingTable, mut out: W) -> Result<(), TableError> {
    for (key, value) in &table.metadata {
        if key.is_empty() || key.contains([':', '\n', '\r']) {
            return Err(TableError::MetadataKey(key.clone()));
        }
        writeln!(out, "# {key}: {}", escape_meta(value))?;
    }
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(HEADER)?;
    for row in &table.rows {
        let t = row.target.as_ref();
        let text = |f: fn(&MappedTerm) -> &str| t.map(f).unwrap_or("").to_string();
        writer.write_record([
            row.source.text.clone(),
            row.source.id.clone().unwrap_or_default(),
            join_values(&row.source.tags),
            text(|t| &t.label),
            text(|t| &t.curie),
            text(|t| &t.iri),
            t.map(|t| format_score(t.score)).unwrap_or_default(),
            t.map(|t| t.rank.to_string()).unwrap_or_default(),
            row.mapper.to_string(),
            text(|t| &t.matched_string),
            row.mapping_type.to_string(),
            row.approval.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn mapping_table_bytes(table: &MappingTable) -> Result<Vec<u8>, TableError> {
    let mut out = Vec::new();
    write_mapping_table_to(table, &mut out)?;
    Ok(out)
}

pub fn write_mapping_table(table: &MappingTable, path: &Path) -> Result<(), TableError> {
    std::fs::write(path, mapping_table_bytes(table)?)?;
    Ok(())
}

pub fn read_mapping_table(path: &Path) -> Result<MappingTable, TableError> {
    parse_mapping_table(&std::fs::read(path)?)
}

/// Parses bytes produced by [`write_mapping_table_to`].
pub fn parse_mapping_table(bytes: &[u8]) -> Result<MappingTable, TableError> {
    let text = std::str::from_utf8(bytes).map_err(|e| TableError::Format {
        line: 1 + bytes[..e.valid_up_to()].iter().filter(|b| **b == b'\n').count() as u64,
        message: "not valid UTF-8".into(),
    })?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);

    let mut metadata = Vec::new();
    let mut offset = 0;
    let mut line_no = 0u64;
    for line in text.split_inclusive('\n') {
        if !line.starts_with('#') {
            break;
        }
        line_no += 1;
        offset += line.len();
        let body = line.trim_end_matches(['\n', '\r']);
        let body = body.strip_prefix("# ").unwrap_or(&body[1..]);
        let (key, value) = body.split_once(':').ok_or_else(|| TableError::Format {
            line: line_no,
            message: "metadata line is not 'key: value'".into(),
        })?;
        let value = value.strip_prefix(' ').unwrap_or(value);
        metadata.push((key.to_string(), unescape_meta(value)));
    }

    let body = &text[offset..];
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(body.as_bytes());
    let mut records = reader.records();
    let header_line = line_no + 1;
    let header = match records.next() {
        Some(record) => record?,
        None => {
            return Err(TableError::Format {
                line: header_line,
                message: "missing header row".into(),
            })
        }
    };
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(TableError::Format {
            line: header_line,
            message: format!("expected header '{}'", HEADER.join(",")),
        });
    }

    let mut rows = Vec::new();
    for record in records {
        let record = record?;
        let start = record.position().map_or(0, |p| p.byte() as usize).min(body.len());
        let line = line_no + 1 + body.as_bytes()[..start].iter().filter(|b| **b == b'\n').count() as u64;
        let bad = |message: String| TableError::Format { line, message };
        if record.len() != HEADER.len() {
            return Err(bad(format!("expected {} fields, found {}", HEADER.len(), record.len())));
        }
        let field = |i: usize| record.get(i).unwrap_or("");
        let mut source = SourceTerm::new(field(0)).with_tags(split_values(field(2)));
        if !field(1).is_empty() {
            source = source.with_id(field(1));
        }
        let target = if field(5).is_empty() {
            None
        } else {
            Some(MappedTerm {
                iri: field(5).to_string(),
                curie: field(4).to_string(),
                label: field(3).to_string(),
                score: field(6)
                    .parse()
                    .map_err(|_| bad(format!("invalid score '{}'", field(6))))?,
                rank: field(7)
                    .parse()
                    .map_err(|_| bad(format!("invalid rank '{}'", field(7))))?,
                matched_string: field(9).to_string(),
            })
        };
        rows.push(Mapping {
            source,
            target,
            mapper: field(8).parse().map_err(bad)?,
            mapping_type: field(10).parse().map_err(bad)?,
            approval: field(11).parse().map_err(bad)?,
        });
    }

    let unmapped = rows
        .iter()
        .filter(|r| r.target.is_none() && r.source.has_tag(UNMAPPED_TAG))
        .map(|r| r.source.clone())
        .collect();
    Ok(MappingTable {
        metadata,
        rows,
        unmapped,
        failures: Vec::new(),
    })
}
