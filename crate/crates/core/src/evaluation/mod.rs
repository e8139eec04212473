//! Comparison of generated mappings with curated benchmark mappings.

mod categorize;
mod compare;
mod sssom;

use thiserror::Error;

pub use categorize::{categorize, categorize_detailed, Categorization, Category, TERM_NOT_FOUND};
pub use compare::{compare_sets, format_summary_table, records_csv, Comparison, ComparisonRecord, ComparisonSummary};
pub use sssom::{parse_sssom, BenchmarkMapping, SssomSet};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("SSSOM: {0}")]
    Format(String),
    #[error("SSSOM: {0}")]
    Csv(#[from] csv::Error),
}
