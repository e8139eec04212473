//! In-memory ontology term store.
//!
//! Ontologies are ingested from OBO Graph JSON documents or from a simple
//! character-separated term table. Both paths produce the same [`Ontology`]
//! value, which is immutable once built and can be shared across threads.

mod filter;
mod hierarchy;
mod locator;
mod obograph;
mod table;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use filter::{filter_terms, TermFilter, TermSet, TermTypeFilter};
pub use hierarchy::{build_hierarchy, HierarchyIndex};
pub use locator::{load_ontology, parse_ontology_bytes, read_locator, LoadOptions, OntologyFormat};
pub use obograph::{parse_obograph, parse_obograph_with_report, IngestReport, RecordError};
pub(crate) use table::{join_values, split_values};
pub use table::{parse_term_table, write_term_table};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed document at byte {offset}: {message}")]
    Malformed { offset: usize, message: String },
    #[error("document contains no parsable terms")]
    EmptyOntology,
    #[error("term table: {0}")]
    Format(String),
    #[error("duplicate IRI in term table: {0}")]
    DuplicateIri(String),
    #[error("unsupported ontology format for {0}")]
    UnsupportedFormat(String),
    #[error("failed to read {locator}: {message}")]
    Retrieve { locator: String, message: String },
    #[error("{locator} is larger than the {limit}-byte limit")]
    TooLarge { locator: String, limit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
pub enum TermType {
    #[default]
    Class,
    Property,
}

impl fmt::Display for TermType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermType::Class => f.write_str("Class"),
            TermType::Property => f.write_str("Property"),
        }
    }
}

impl FromStr for TermType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "" | "class" => Ok(TermType::Class),
            "property" => Ok(TermType::Property),
            other => Err(format!("unknown term type '{other}'")),
        }
    }
}

/// One controlled ontology term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntologyTerm {
    pub iri: String,
    pub curie: String,
    /// All labels in document order; the first one is the display label.
    pub labels: Vec<String>,
    pub exact_synonyms: Vec<String>,
    pub broad_synonyms: Vec<String>,
    pub definitions: Vec<String>,
    pub parents: BTreeSet<String>,
    pub children: BTreeSet<String>,
    pub instances: BTreeSet<String>,
    pub deprecated: bool,
    pub term_type: TermType,
}

impl OntologyTerm {
    pub fn new(iri: impl Into<String>, term_type: TermType) -> Self {
        let iri = iri.into();
        OntologyTerm {
            curie: compact_iri(&iri),
            iri,
            labels: Vec::new(),
            exact_synonyms: Vec::new(),
            broad_synonyms: Vec::new(),
            definitions: Vec::new(),
            parents: BTreeSet::new(),
            children: BTreeSet::new(),
            instances: BTreeSet::new(),
            deprecated: false,
            term_type,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.labels.push(label.into());
        self
    }

    pub fn with_synonym(mut self, synonym: impl Into<String>) -> Self {
        self.exact_synonyms.push(synonym.into());
        self
    }

    pub fn with_parent(mut self, parent: impl Into<String>) -> Self {
        self.parents.insert(parent.into());
        self
    }

    pub fn deprecated(mut self, deprecated: bool) -> Self {
        self.deprecated = deprecated;
        self
    }

    /// The first label, falling back to the first exact synonym.
    pub fn display_label(&self) -> &str {
        self.labels
            .first()
            .or_else(|| self.exact_synonyms.first())
            .map(String::as_str)
            .unwrap_or("")
    }

    /// Terms with neither a label nor a synonym never enter a matching corpus.
    pub fn is_matchable(&self) -> bool {
        !self.labels.is_empty() || !self.exact_synonyms.is_empty() || !self.broad_synonyms.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Ontology {
    pub acronym: String,
    pub source_locator: String,
    pub terms: BTreeMap<String, OntologyTerm>,
    pub version_info: Option<String>,
}

impl Ontology {
    /// Builds an ontology from terms, deriving `children` from `parents`.
    pub fn from_terms(terms: impl IntoIterator<Item = OntologyTerm>) -> Self {
        let mut ontology = Ontology {
            terms: terms.into_iter().map(|t| (t.iri.clone(), t)).collect(),
            ..Default::default()
        };
        ontology.link_children();
        ontology
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, iri: &str) -> Option<&OntologyTerm> {
        self.terms.get(iri)
    }

    /// Looks a term up by IRI, then by CURIE.
    pub fn find(&self, id: &str) -> Option<&OntologyTerm> {
        self.terms
            .get(id)
            .or_else(|| self.terms.values().find(|t| t.curie == id))
    }

    /// Recomputes every `children` set from the `parents` sets.
    pub fn link_children(&mut self) {
        let mut edges = Vec::new();
        for term in self.terms.values_mut() {
            term.children.clear();
        }
        for term in self.terms.values() {
            for parent in &term.parents {
                edges.push((parent.clone(), term.iri.clone()));
            }
        }
        for (parent, child) in edges {
            if let Some(p) = self.terms.get_mut(&parent) {
                p.children.insert(child);
            }
        }
    }

    /// Parent IRIs that do not resolve to a term in this ontology.
    pub fn dangling_references(&self) -> BTreeSet<&str> {
        self.terms
            .values()
            .flat_map(|t| t.parents.iter())
            .filter(|p| !self.terms.contains_key(p.as_str()))
            .map(String::as_str)
            .collect()
    }
}

/// Compacts an OBO-style IRI (`http://purl.obolibrary.org/obo/EFO_0003777`)
/// into a CURIE (`EFO:0003777`). Identifiers that are already compact, or that
/// do not follow the `PREFIX_LOCAL` convention, are returned unchanged.
pub fn compact_iri(iri: &str) -> String {
    if !iri.contains("://") {
        return iri.to_string();
    }
    let local = iri.rsplit(['/', '#']).next().unwrap_or(iri);
    if let Some((prefix, id)) = local.split_once('_') {
        let valid = |s: &str| !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric());
        if valid(prefix) && valid(id) {
            return format!("{prefix}:{id}");
        }
    }
    iri.to_string()
}
