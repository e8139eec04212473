use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::categorize::{categorize_detailed, Category};
use super::sssom::BenchmarkMapping;
use crate::engine::MappingTable;
use crate::ontology::HierarchyIndex;
use crate::preprocess::normalize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonRecord {
    pub input_text: String,
    pub source_id: Option<String>,
    pub tool_iri: String,
    pub benchmark_iri: String,
    pub category: Category,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub counts: BTreeMap<Category, usize>,
    /// Benchmark inputs with no rank-1 tool mapping; not part of any category.
    pub unmapped: usize,
}

impl ComparisonSummary {
    pub fn from_records(records: &[ComparisonRecord], unmapped: usize) -> Self {
        let mut counts: BTreeMap<Category, usize> = Category::ALL.iter().map(|&c| (c, 0)).collect();
        for r in records {
            *counts.entry(r.category).or_insert(0) += 1;
        }
        ComparisonSummary { counts, unmapped }
    }

    pub fn count(&self, category: Category) -> usize {
        self.counts.get(&category).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    /// Share of categorized records, in percent rounded to two decimals.
    pub fn percentage(&self, category: Category) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        (10_000.0 * self.count(category) as f64 / total as f64).round() / 100.0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comparison {
    pub records: Vec<ComparisonRecord>,
    pub summary: ComparisonSummary,
    /// Up to `sample_size` records per category, in input order.
    pub samples: BTreeMap<Category, Vec<ComparisonRecord>>,
}

/// Pairs each benchmark input with the tool's rank-1 mapping and
/// categorizes the pair. Inputs are joined on source id, then on
/// normalized text.
pub fn compare_sets(
    tool: &MappingTable,
    benchmark: &[BenchmarkMapping],
    hierarchy: &HierarchyIndex,
    sample_size: usize,
) -> Comparison {
    let mut by_id: HashMap<&str, &str> = HashMap::new();
    let mut by_text: HashMap<String, &str> = HashMap::new();
    for row in &tool.rows {
        let Some(target) = row.target.as_ref().filter(|t| t.rank == 1) else {
            continue;
        };
        if let Some(id) = &row.source.id {
            by_id.entry(id.as_str()).or_insert(&target.iri);
        }
        by_text.entry(row.source.normalized.clone()).or_insert(&target.iri);
    }

    let mut records = Vec::new();
    let mut unmapped = 0;
    for b in benchmark {
        let tool_iri = b
            .source_id
            .as_deref()
            .and_then(|id| by_id.get(id))
            .or_else(|| by_text.get(&normalize(&b.input_text)));
        let Some(&tool_iri) = tool_iri else {
            unmapped += 1;
            continue;
        };
        let c = categorize_detailed(tool_iri, &b.benchmark_iri, hierarchy);
        records.push(ComparisonRecord {
            input_text: b.input_text.clone(),
            source_id: b.source_id.clone(),
            tool_iri: tool_iri.to_string(),
            benchmark_iri: b.benchmark_iri.clone(),
            category: c.category,
            note: c.note,
        });
    }

    let mut samples: BTreeMap<Category, Vec<ComparisonRecord>> = BTreeMap::new();
    for r in &records {
        let bucket = samples.entry(r.category).or_default();
        if bucket.len() < sample_size {
            bucket.push(r.clone());
        }
    }
    Comparison {
        summary: ComparisonSummary::from_records(&records, unmapped),
        records,
        samples,
    }
}

/// A text table with one row per category and one column per named set.
pub fn format_summary_table(sets: &[(&str, &ComparisonSummary)]) -> String {
    let mut rows: Vec<Vec<String>> = vec![std::iter::once("Category".to_string())
        .chain(sets.iter().map(|(name, _)| name.to_string()))
        .collect()];
    for category in Category::ALL {
        rows.push(
            std::iter::once(category.label().to_string())
                .chain(
                    sets.iter()
                        .map(|(_, s)| format!("{} ({:.2}%)", s.count(category), s.percentage(category))),
                )
                .collect(),
        );
    }
    rows.push(
        std::iter::once("Total".to_string())
            .chain(sets.iter().map(|(_, s)| s.total().to_string()))
            .collect(),
    );
    rows.push(
        std::iter::once("Unmapped".to_string())
            .chain(sets.iter().map(|(_, s)| s.unmapped.to_string()))
            .collect(),
    );

    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        let cells: Vec<String> = row.iter().zip(&widths).map(|(cell, w)| format!("{cell:<w$}")).collect();
        out.push_str(cells.join(" | ").trim_end());
        out.push('\n');
        if i == 0 {
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            out.push_str(&rule.join("-+-"));
            out.push('\n');
        }
    }
    out
}

/// Per-record CSV report.
pub fn records_csv(records: &[ComparisonRecord]) -> Result<Vec<u8>, csv::Error> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record([
        "Input",
        "Source ID",
        "Tool Mapping",
        "Benchmark Mapping",
        "Category",
        "Note",
    ])?;
    for r in records {
        writer.write_record([
            r.input_text.as_str(),
            r.source_id.as_deref().unwrap_or(""),
            &r.tool_iri,
            &r.benchmark_iri,
            r.category.label(),
            r.note.as_deref().unwrap_or(""),
        ])?;
    }
    writer.into_inner().map_err(|e| e.into_error().into())
}
