//! Character-separated term tables.
//!
//! Required columns are `iri` and `label`. Multi-valued cells (labels,
//! synonyms, parents, ...) are joined with `|`; a literal `|` or `\` inside a
//! value is escaped with a backslash.

use std::collections::{BTreeMap, BTreeSet};

use super::{compact_iri, IngestError, Ontology, OntologyTerm, TermType};

const COLUMNS: [&str; 10] = [
    "iri",
    "curie",
    "label",
    "exact_synonyms",
    "broad_synonyms",
    "definitions",
    "parents",
    "instances",
    "deprecated",
    "term_type",
];

fn separator_byte(separator: char) -> Result<u8, IngestError> {
    u8::try_from(separator as u32)
        .ok()
        .filter(u8::is_ascii)
        .ok_or_else(|| IngestError::Format(format!("separator {separator:?} is not a single ASCII character")))
}

pub(crate) fn join_values<'a>(values: impl IntoIterator<Item = &'a String>) -> String {
    let mut out = String::new();
    for (i, v) in values.into_iter().enumerate() {
        if i > 0 {
            out.push('|');
        }
        for c in v.chars() {
            if c == '|' || c == '\\' {
                out.push('\\');
            }
            out.push(c);
        }
    }
    out
}

pub(crate) fn split_values(cell: &str) -> Vec<String> {
    if cell.is_empty() {
        return Vec::new();
    }
    let mut values = Vec::new();
    let mut current = String::new();
    let mut chars = cell.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => current.extend(chars.next()),
            '|' => values.push(std::mem::take(&mut current)),
            c => current.push(c),
        }
    }
    values.push(current);
    values
}

fn parse_bool(cell: &str) -> Result<bool, String> {
    match cell.trim().to_ascii_lowercase().as_str() {
        "" | "false" | "0" | "no" => Ok(false),
        "true" | "1" | "yes" => Ok(true),
        other => Err(format!("invalid boolean '{other}'")),
    }
}

/// Parses a term table with a header row. Unknown columns are ignored.
pub fn parse_term_table(bytes: &[u8], separator: char) -> Result<Ontology, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(separator_byte(separator)?)
        .has_headers(true)
        .flexible(true)
        .from_reader(bytes);
    let headers = reader
        .headers()
        .map_err(|e| IngestError::Format(e.to_string()))?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name));
    let iri_col = column("iri").ok_or_else(|| IngestError::Format("missing 'iri' column".into()))?;
    let label_col = column("label").ok_or_else(|| IngestError::Format("missing 'label' column".into()))?;
    let curie_col = column("curie");
    let exact_col = column("exact_synonyms");
    let broad_col = column("broad_synonyms");
    let def_col = column("definitions");
    let parents_col = column("parents");
    let instances_col = column("instances");
    let deprecated_col = column("deprecated");
    let type_col = column("term_type");

    let mut terms: BTreeMap<String, OntologyTerm> = BTreeMap::new();
    for (row, record) in reader.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| IngestError::Format(format!("line {line}: {e}")))?;
        let cell = |col: Option<usize>| col.and_then(|c| record.get(c)).unwrap_or("");
        let iri = cell(Some(iri_col)).trim();
        if iri.is_empty() {
            return Err(IngestError::Format(format!("line {line}: empty iri")));
        }
        if terms.contains_key(iri) {
            return Err(IngestError::DuplicateIri(iri.to_string()));
        }
        let term_type = cell(type_col)
            .parse::<TermType>()
            .map_err(|e| IngestError::Format(format!("line {line}: {e}")))?;
        let deprecated =
            parse_bool(cell(deprecated_col)).map_err(|e| IngestError::Format(format!("line {line}: {e}")))?;
        let curie = match cell(curie_col) {
            "" => compact_iri(iri),
            c => c.to_string(),
        };
        let term = OntologyTerm {
            iri: iri.to_string(),
            curie,
            labels: split_values(cell(Some(label_col))),
            exact_synonyms: split_values(cell(exact_col)),
            broad_synonyms: split_values(cell(broad_col)),
            definitions: split_values(cell(def_col)),
            parents: split_values(cell(parents_col)).into_iter().collect(),
            children: BTreeSet::new(),
            instances: split_values(cell(instances_col)).into_iter().collect(),
            deprecated,
            term_type,
        };
        terms.insert(term.iri.clone(), term);
    }
    let mut ontology = Ontology {
        terms,
        ..Default::default()
    };
    ontology.link_children();
    Ok(ontology)
}

/// Serializes every term field except `children`, which is derived on read.
pub fn write_term_table(ontology: &Ontology, separator: char) -> Result<Vec<u8>, IngestError> {
    let mut writer = csv::WriterBuilder::new()
        .delimiter(separator_byte(separator)?)
        .from_writer(Vec::new());
    let io = |e: csv::Error| IngestError::Format(e.to_string());
    writer.write_record(COLUMNS).map_err(io)?;
    for term in ontology.terms.values() {
        writer
            .write_record([
                term.iri.clone(),
                term.curie.clone(),
                join_values(&term.labels),
                join_values(&term.exact_synonyms),
                join_values(&term.broad_synonyms),
                join_values(&term.definitions),
                join_values(&term.parents),
                join_values(&term.instances),
                term.deprecated.to_string(),
                term.term_type.to_string(),
            ])
            .map_err(io)?;
    }
    writer.into_inner().map_err(|e| IngestError::Format(e.to_string()))
}
