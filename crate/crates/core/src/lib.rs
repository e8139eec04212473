//! Maps free-text terms to ontology terms.
//!
//! The pipeline loads an ontology (OBO Graph JSON or a term table), optionally
//! caches it, preprocesses source terms, and ranks candidate ontology terms
//! with a TF-IDF n-gram matcher, a pairwise string metric, or a remote
//! annotation service. Results can be written as CSV tables and compared
//! against reference mappings.

pub mod cache;
pub mod engine;
pub mod evaluation;
pub mod ontology;
pub mod preprocess;
pub mod remote;
pub mod similarity;
pub mod tfidf;

mod candidate;
pub use candidate::Candidate;
