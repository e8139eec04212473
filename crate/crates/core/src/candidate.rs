use crate::ontology::OntologyTerm;

/// One ranked ontology term proposed for a query.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate<'a> {
    pub term: &'a OntologyTerm,
    pub score: f64,
    /// The label or synonym that produced the score, as written in the ontology.
    pub matched_string: String,
}
