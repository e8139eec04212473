use std::sync::Arc;

use axum::extract::{Query, State};
use axum::Json;
use serde::{Deserialize, Serialize};

use ontomap::ontology::{compact_iri, Ontology};

use crate::error::ApiError;
use crate::{AppState, LoadedOntology};

#[derive(Debug, Deserialize)]
pub struct NeighborhoodQuery {
    /// IRI or CURIE of the term.
    pub iri: String,
    /// Job whose ontology to search.
    pub job: Option<String>,
    /// Cached ontology acronym, used when no job is given.
    pub ontology: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRef {
    pub iri: String,
    pub curie: String,
    pub label: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Neighborhood {
    pub iri: String,
    pub curie: String,
    pub label: String,
    pub labels: Vec<String>,
    pub synonyms: Vec<String>,
    pub definitions: Vec<String>,
    pub deprecated: bool,
    /// Every ancestor, sorted by IRI.
    pub ancestors: Vec<TermRef>,
    pub parents: Vec<TermRef>,
    pub children: Vec<TermRef>,
    pub instances: Vec<TermRef>,
}

fn term_ref(ontology: &Ontology, iri: &str) -> TermRef {
    match ontology.get(iri) {
        Some(t) => TermRef {
            iri: t.iri.clone(),
            curie: t.curie.clone(),
            label: t.display_label().to_string(),
        },
        None => TermRef {
            iri: iri.to_string(),
            curie: compact_iri(iri),
            label: String::new(),
        },
    }
}

pub fn neighborhood_of(loaded: &LoadedOntology, id: &str) -> Option<Neighborhood> {
    let (ontology, hierarchy) = (&loaded.ontology, &loaded.hierarchy);
    let term = ontology.find(id)?;
    let refs = |iris: Vec<&str>| iris.into_iter().map(|i| term_ref(ontology, i)).collect::<Vec<_>>();
    Some(Neighborhood {
        iri: term.iri.clone(),
        curie: term.curie.clone(),
        label: term.display_label().to_string(),
        labels: term.labels.clone(),
        synonyms: term.exact_synonyms.clone(),
        definitions: term.definitions.clone(),
        deprecated: term.deprecated,
        ancestors: refs(hierarchy.ancestors(&term.iri)),
        parents: refs(hierarchy.direct_parents(&term.iri)),
        children: refs(hierarchy.direct_children(&term.iri)),
        instances: term.instances.iter().map(|i| term_ref(ontology, i)).collect(),
    })
}

pub async fn neighborhood(
    State(state): State<Arc<AppState>>,
    Query(query): Query<NeighborhoodQuery>,
) -> Result<Json<Neighborhood>, ApiError> {
    let loaded = match (&query.job, &query.ontology) {
        (Some(job), _) => state
            .jobs
            .finished(job)?
            .ontology
            .ok_or_else(|| ApiError::conflict(format!("job '{job}' has no local ontology")))?,
        (None, Some(acronym)) => {
            let (state, acronym) = (state.clone(), acronym.clone());
            tokio::task::spawn_blocking(move || state.cached_ontology(&acronym))
                .await
                .map_err(|e| ApiError::internal(e.to_string()))?
                .map_err(|e| ApiError::not_found(e.to_string()))?
        }
        (None, None) => return Err(ApiError::bad_request("give either 'job' or 'ontology'")),
    };
    neighborhood_of(&loaded, &query.iri)
        .map(Json)
        .ok_or_else(|| ApiError::not_found(format!("no term '{}' in the ontology", query.iri)))
}
