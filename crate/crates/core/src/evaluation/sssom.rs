use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::EvalError;

/// A human-curated mapping for one input string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkMapping {
    pub input_text: String,
    pub benchmark_iri: String,
    pub source_id: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SssomSet {
    pub mappings: Vec<BenchmarkMapping>,
    /// Rows discarded because their subject has more than one mapping.
    pub dropped: usize,
}

const REQUIRED: [&str; 3] = ["subject_id", "subject_label", "object_id"];

/// Reads an SSSOM TSV file, keeping only subjects mapped exactly once.
pub fn parse_sssom(bytes: &[u8]) -> Result<SssomSet, EvalError> {
    let text = std::str::from_utf8(bytes).map_err(|e| EvalError::Format(format!("not UTF-8: {e}")))?;
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| format!("{l}\n"))
        .collect();
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .flexible(true)
        .quoting(false)
        .from_reader(body.as_bytes());
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| EvalError::Format(format!("missing column '{name}'")))
    };
    let [subject, label, object] = REQUIRED.map(column);
    let (subject, label, object) = (subject?, label?, object?);

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let get = |i: usize| record.get(i).unwrap_or("").trim().to_string();
        rows.push((get(subject), get(label), get(object)));
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for (s, _, _) in &rows {
        *counts.entry(s.as_str()).or_insert(0) += 1;
    }
    let mut set = SssomSet::default();
    for (s, l, o) in &rows {
        if counts[s.as_str()] > 1 {
            set.dropped += 1;
            continue;
        }
        set.mappings.push(BenchmarkMapping {
            input_text: l.clone(),
            benchmark_iri: o.clone(),
            source_id: (!s.is_empty()).then(|| s.clone()),
        });
    }
    Ok(set)
}
