//! The mapping pipeline.
//!
//! `map_terms` runs templates and the blocklist over the source terms,
//! restricts the ontology to the configured subset, dispatches to a matcher
//! and assembles a [`MappingTable`]. Output rows follow input order; within a
//! source term they follow rank order.

mod config;
mod graphs;
mod input;
mod table;

use std::time::Duration;

use thiserror::Error;

pub use config::{Approval, Mapper, MappingConfig, MappingType, RemoteSettings};
pub use graphs::{export_term_graphs, term_graph, GraphLink, GraphNode, TermGraph, TermGraphs};
pub use input::{read_source_terms, InputError, SourceInput};
pub use table::{
    format_score, mapping_table_bytes, parse_mapping_table, read_mapping_table, write_mapping_table,
    write_mapping_table_to, MappedTerm, Mapping, MappingFailure, MappingTable, TableError, HEADER,
};

use crate::cache::{CacheError, CacheStore};
use crate::candidate::Candidate;
use crate::ontology::{compact_iri, filter_terms, load_ontology, IngestError, LoadOptions, Ontology, TermFilter};
use crate::preprocess::{Blocklist, PreprocessError, RegexTemplates, SourceTerm, UNMAPPED_TAG};
use crate::remote::{
    bioportal_annotate, zooma_annotate, RemoteConfig, RemoteError, RemoteOutcome, ReqwestTransport, Transport,
    BIOPORTAL_BASE_URL, ZOOMA_BASE_URL,
};
use crate::similarity::SyntacticMatcher;
use crate::tfidf::{TfidfError, TfidfMatcher};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Remote(#[from] RemoteError),
    #[error(transparent)]
    Index(#[from] TfidfError),
    #[error(transparent)]
    Input(#[from] InputError),
    #[error(transparent)]
    Table(#[from] TableError),
}

/// Result of matching one query: ranked targets or a failure reason.
type Outcome = Result<Vec<MappedTerm>, String>;

fn from_candidates(candidates: Vec<Candidate<'_>>) -> Vec<MappedTerm> {
    candidates
        .into_iter()
        .map(|c| MappedTerm {
            iri: c.term.iri.clone(),
            curie: c.term.curie.clone(),
            label: c.term.display_label().to_string(),
            score: c.score,
            rank: 0,
            matched_string: c.matched_string,
        })
        .collect()
}

fn preprocess(terms: Vec<SourceTerm>, config: &MappingConfig) -> Result<Vec<SourceTerm>, EngineError> {
    let terms = RegexTemplates::compile(&config.templates)?.apply(terms);
    Ok(Blocklist::compile(&config.blocklist)?.apply(terms))
}

fn term_filter(config: &MappingConfig) -> TermFilter {
    TermFilter {
        base_iris: config.base_iris.clone(),
        excl_deprecated: config.excl_deprecated,
        term_type: config.term_type,
    }
}

/// Keeps targets at or above `min_score`, best first with ties by IRI, at
/// most `max_mappings`, ranked from 1.
fn finalize(mut targets: Vec<MappedTerm>, config: &MappingConfig) -> Vec<MappedTerm> {
    targets.retain(|t| t.score >= config.min_score);
    targets.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.iri.cmp(&b.iri)));
    targets.truncate(config.max_mappings);
    for (i, t) in targets.iter_mut().enumerate() {
        t.rank = i + 1;
    }
    targets
}

fn assemble(
    terms: Vec<SourceTerm>,
    outcomes: Vec<Option<Outcome>>,
    metadata: Vec<(String, String)>,
    config: &MappingConfig,
) -> MappingTable {
    let mut table = MappingTable {
        metadata,
        ..Default::default()
    };
    let row = |source: SourceTerm, target: Option<MappedTerm>| Mapping {
        source,
        target,
        mapper: config.mapper,
        mapping_type: MappingType::Exact,
        approval: Approval::Unapproved,
    };
    for (mut source, outcome) in terms.into_iter().zip(outcomes) {
        let Some(outcome) = outcome else {
            table.rows.push(row(source, None));
            continue;
        };
        let targets = match outcome {
            Ok(targets) => finalize(targets, config),
            Err(reason) => {
                table.failures.push(MappingFailure {
                    source: source.clone(),
                    reason,
                });
                Vec::new()
            }
        };
        if targets.is_empty() {
            source.tags.push(UNMAPPED_TAG.to_string());
            if config.incl_unmapped {
                table.rows.push(row(source.clone(), None));
            }
            table.unmapped.push(source);
        } else {
            table
                .rows
                .extend(targets.into_iter().map(|t| row(source.clone(), Some(t))));
        }
    }
    table
}

fn base_metadata(ontology: &str, locator: &str, config: &MappingConfig) -> Vec<(String, String)> {
    let mut metadata = vec![
        ("tool_version".to_string(), TOOL_VERSION.to_string()),
        (
            "timestamp".to_string(),
            chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        ),
        ("ontology".to_string(), ontology.to_string()),
        ("ontology_locator".to_string(), locator.to_string()),
    ];
    metadata.extend(config.metadata());
    metadata
}

/// Matches preprocessed terms against a loaded ontology.
fn local_outcomes(
    terms: &[SourceTerm],
    ontology: &Ontology,
    config: &MappingConfig,
) -> Result<Vec<Option<Outcome>>, EngineError> {
    let corpus = filter_terms(ontology, &term_filter(config));
    let active: Vec<usize> = (0..terms.len()).filter(|&i| !terms[i].is_ignored()).collect();
    let queries: Vec<&str> = active.iter().map(|&i| terms[i].normalized.as_str()).collect();

    let results: Vec<Vec<Candidate<'_>>> = if corpus.is_empty() || queries.is_empty() {
        vec![Vec::new(); queries.len()]
    } else if let Some(metric) = config.mapper.metric() {
        SyntacticMatcher::new(&corpus, config.include_broad_synonyms).best_matches_many(
            &queries,
            metric,
            config.max_mappings,
        )
    } else {
        TfidfMatcher::new(&corpus, config.ngram_size, config.include_broad_synonyms)?.match_normalized(
            &queries,
            config.max_mappings,
            config.min_score,
        )
    };

    let mut outcomes: Vec<Option<Outcome>> = vec![None; terms.len()];
    for (i, candidates) in active.into_iter().zip(results) {
        outcomes[i] = Some(Ok(from_candidates(candidates)));
    }
    Ok(outcomes)
}

/// Maps source terms against an already loaded ontology with a local matcher.
pub fn map_terms_with_ontology(
    source_terms: Vec<SourceTerm>,
    ontology: &Ontology,
    config: &MappingConfig,
) -> Result<MappingTable, EngineError> {
    config.validate().map_err(EngineError::Config)?;
    if config.mapper.is_remote() {
        return Err(EngineError::Config(format!(
            "{} does not use a local ontology",
            config.mapper
        )));
    }
    let terms = preprocess(source_terms, config)?;
    let outcomes = local_outcomes(&terms, ontology, config)?;
    let metadata = base_metadata(&ontology.acronym, &ontology.source_locator, config);
    Ok(assemble(terms, outcomes, metadata, config))
}

fn remote_config(ontologies: &str, config: &MappingConfig) -> RemoteConfig {
    let default_base = if config.mapper == Mapper::Bioportal {
        BIOPORTAL_BASE_URL
    } else {
        ZOOMA_BASE_URL
    };
    let settings = &config.remote;
    let mut remote = RemoteConfig::new(settings.base_url.as_deref().unwrap_or(default_base), ontologies);
    remote.api_key = settings.api_key.clone();
    if let Some(n) = settings.batch_size {
        remote.batch_size = n;
    }
    if let Some(n) = settings.concurrency {
        remote.concurrency = n;
    }
    if let Some(ms) = settings.delay_ms {
        remote.delay = Duration::from_millis(ms);
    }
    remote
}

/// Maps source terms through a remote annotator. `ontologies` is a
/// comma-separated acronym list or `all`.
pub fn map_terms_remote(
    source_terms: Vec<SourceTerm>,
    ontologies: &str,
    config: &MappingConfig,
    transport: &dyn Transport,
) -> Result<MappingTable, EngineError> {
    config.validate().map_err(EngineError::Config)?;
    let terms = preprocess(source_terms, config)?;
    let active: Vec<usize> = (0..terms.len()).filter(|&i| !terms[i].is_ignored()).collect();
    let batch: Vec<SourceTerm> = active.iter().map(|&i| terms[i].clone()).collect();
    let remote = remote_config(ontologies, config);
    let RemoteOutcome {
        annotations, failures, ..
    } = match config.mapper {
        Mapper::Bioportal => bioportal_annotate(&batch, &remote, transport)?,
        Mapper::Zooma => zooma_annotate(&batch, &remote, transport)?,
        other => return Err(EngineError::Config(format!("{other} is not a remote mapper"))),
    };

    let mut per_term: Vec<Outcome> = vec![Ok(Vec::new()); batch.len()];
    for failure in failures {
        per_term[failure.source_index] = Err(failure.reason);
    }
    let filter = term_filter(config);
    for a in annotations {
        let Ok(targets) = &mut per_term[a.source_index] else {
            continue;
        };
        if !filter.base_iris.is_empty() && !filter.base_iris.iter().any(|p| a.term_iri.starts_with(p.as_str())) {
            continue;
        }
        match targets.iter_mut().find(|t| t.iri == a.term_iri) {
            Some(existing) => existing.score = existing.score.max(a.score),
            None => targets.push(MappedTerm {
                curie: compact_iri(&a.term_iri),
                iri: a.term_iri,
                label: a.term_label.clone(),
                score: a.score,
                rank: 0,
                matched_string: a.term_label,
            }),
        }
    }
    let mut outcomes: Vec<Option<Outcome>> = vec![None; terms.len()];
    for (i, outcome) in active.into_iter().zip(per_term) {
        outcomes[i] = Some(outcome);
    }
    let metadata = base_metadata(ontologies, &remote.base_url, config);
    Ok(assemble(terms, outcomes, metadata, config))
}

/// Resolves `target` and maps the source terms.
///
/// Local mappers read `target` as a path or URL, or as a cached acronym when
/// `use_cache` is set. Remote mappers read it as an acronym list.
pub fn map_terms(
    source_terms: Vec<SourceTerm>,
    target: &str,
    config: &MappingConfig,
) -> Result<MappingTable, EngineError> {
    map_terms_in(source_terms, target, config, &CacheStore::from_env())
}

/// Like [`map_terms`] with an explicit cache location.
pub fn map_terms_in(
    source_terms: Vec<SourceTerm>,
    target: &str,
    config: &MappingConfig,
    cache: &CacheStore,
) -> Result<MappingTable, EngineError> {
    if config.mapper.is_remote() {
        return map_terms_remote(source_terms, target, config, &ReqwestTransport::new());
    }
    let ontology = resolve_ontology(target, config, cache)?;
    map_terms_with_ontology(source_terms, &ontology, config)
}

pub fn resolve_ontology(target: &str, config: &MappingConfig, cache: &CacheStore) -> Result<Ontology, EngineError> {
    if config.use_cache {
        Ok(cache.load_cached(target)?)
    } else {
        Ok(load_ontology(target, &LoadOptions::default())?)
    }
}
