use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Ontology, OntologyTerm, TermType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TermTypeFilter {
    #[default]
    Classes,
    Properties,
    Both,
}

impl TermTypeFilter {
    pub fn accepts(self, term_type: TermType) -> bool {
        matches!(
            (self, term_type),
            (TermTypeFilter::Both, _)
                | (TermTypeFilter::Classes, TermType::Class)
                | (TermTypeFilter::Properties, TermType::Property)
        )
    }
}

impl fmt::Display for TermTypeFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TermTypeFilter::Classes => "classes",
            TermTypeFilter::Properties => "properties",
            TermTypeFilter::Both => "both",
        })
    }
}

impl FromStr for TermTypeFilter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "class" | "classes" => Ok(TermTypeFilter::Classes),
            "property" | "properties" => Ok(TermTypeFilter::Properties),
            "both" | "any" => Ok(TermTypeFilter::Both),
            other => Err(format!(
                "unknown term type '{other}' (expected classes, properties or both)"
            )),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TermFilter {
    /// IRI prefixes; empty keeps every term.
    pub base_iris: Vec<String>,
    pub excl_deprecated: bool,
    pub term_type: TermTypeFilter,
}

impl TermFilter {
    pub fn accepts(&self, term: &OntologyTerm) -> bool {
        (self.base_iris.is_empty() || self.base_iris.iter().any(|p| term.iri.starts_with(p.as_str())))
            && !(self.excl_deprecated && term.deprecated)
            && self.term_type.accepts(term.term_type)
    }
}

/// Terms selected for matching, in ascending IRI order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TermSet<'a>(Vec<&'a OntologyTerm>);

impl<'a> TermSet<'a> {
    pub fn new(mut terms: Vec<&'a OntologyTerm>) -> Self {
        terms.sort_by(|a, b| a.iri.cmp(&b.iri));
        terms.dedup_by(|a, b| a.iri == b.iri);
        TermSet(terms)
    }

    pub fn all(ontology: &'a Ontology) -> Self {
        TermSet(ontology.terms.values().collect())
    }

    pub fn filter(&self, filter: &TermFilter) -> TermSet<'a> {
        TermSet(self.0.iter().copied().filter(|t| filter.accepts(t)).collect())
    }

    pub fn terms(&self) -> &[&'a OntologyTerm] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = &'a OntologyTerm> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn filter_terms<'a>(ontology: &'a Ontology, filter: &TermFilter) -> TermSet<'a> {
    TermSet::all(ontology).filter(filter)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> Ontology {
        Ontology::from_terms([
            OntologyTerm::new("http://purl.obolibrary.org/obo/MONDO_0000001", TermType::Class).with_label("disease"),
            OntologyTerm::new("http://purl.obolibrary.org/obo/UBERON_0000948", TermType::Class).with_label("heart"),
            OntologyTerm::new("http://purl.obolibrary.org/obo/MONDO_0000002", TermType::Class)
                .with_label("old")
                .deprecated(true),
            OntologyTerm::new("http://purl.obolibrary.org/obo/RO_0000001", TermType::Property).with_label("part of"),
        ])
    }

    #[test]
    fn base_iri_prefixes() {
        let ontology = fixture();
        let filter = TermFilter {
            base_iris: vec!["http://purl.obolibrary.org/obo/MONDO".into()],
            ..Default::default()
        };
        let set = filter_terms(&ontology, &filter);
        assert_eq!(set.len(), 2);
        assert!(set.iter().all(|t| t.iri.contains("MONDO")));
    }

    #[test]
    fn deprecated_terms_excluded() {
        let ontology = fixture();
        let filter = TermFilter {
            excl_deprecated: true,
            ..Default::default()
        };
        assert!(filter_terms(&ontology, &filter).iter().all(|t| !t.deprecated));
    }

    #[test]
    fn both_types_keep_everything_sorted() {
        let ontology = fixture();
        let filter = TermFilter {
            term_type: TermTypeFilter::Both,
            ..Default::default()
        };
        let set = filter_terms(&ontology, &filter);
        let iris: Vec<_> = set.iter().map(|t| t.iri.as_str()).collect();
        let mut sorted = iris.clone();
        sorted.sort();
        assert_eq!(iris.len(), 4);
        assert_eq!(iris, sorted);
        assert_eq!(
            filter_terms(&ontology, &TermFilter::default()).len(),
            3,
            "classes only by default"
        );
    }

    #[test]
    fn filtering_is_idempotent() {
        let ontology = fixture();
        let filter = TermFilter {
            base_iris: vec!["http://purl.obolibrary.org/obo/MONDO".into()],
            excl_deprecated: true,
            term_type: TermTypeFilter::Classes,
        };
        let once = filter_terms(&ontology, &filter);
        assert_eq!(once.filter(&filter), once);
    }
}
