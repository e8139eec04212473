use log::warn;
use serde::Deserialize;
use url::Url;

use super::{
    acronym_of, run_jobs, Fetch, HttpRequest, Job, RemoteAnnotation, RemoteConfig, RemoteError, RemoteOutcome,
    TermFailure, Transport,
};
use crate::preprocess::SourceTerm;

pub const ZOOMA_BASE_URL: &str = "https://www.ebi.ac.uk/spot/zooma/v2/api";

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct Annotation {
    #[serde(default)]
    semantic_tags: Vec<String>,
    #[serde(default)]
    confidence: Option<String>,
    #[serde(default)]
    annotated_property: Option<Property>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct Property {
    property_value: Option<String>,
}

/// Score for a confidence level; `None` for unrecognized levels.
pub fn confidence_score(confidence: &str) -> Option<f64> {
    match confidence.trim().to_ascii_uppercase().as_str() {
        "HIGH" => Some(1.0),
        "GOOD" => Some(0.75),
        "MEDIUM" => Some(0.5),
        "LOW" => Some(0.25),
        _ => None,
    }
}

/// Annotates each source term with one Zooma-style request.
pub fn zooma_annotate(
    terms: &[SourceTerm],
    config: &RemoteConfig,
    transport: &dyn Transport,
) -> Result<RemoteOutcome, RemoteError> {
    let endpoint = format!("{}/services/annotate", config.base_url.trim_end_matches('/'));
    let filter = match config.ontology_list() {
        Some(list) => format!(
            "required:[none],ontologies:[{}]",
            list.iter()
                .map(|s| s.to_ascii_lowercase())
                .collect::<Vec<_>>()
                .join(",")
        ),
        None => "required:[none]".to_string(),
    };
    let jobs = terms
        .iter()
        .enumerate()
        .map(|(i, term)| {
            let url = Url::parse_with_params(
                &endpoint,
                [("propertyValue", term.text.trim()), ("filter", filter.as_str())],
            )
            .map_err(|_| RemoteError::BadUrl(endpoint.clone()))?;
            Ok(Job {
                request: HttpRequest {
                    url: url.into(),
                    headers: Vec::new(),
                },
                members: vec![i],
            })
        })
        .collect::<Result<Vec<Job>, RemoteError>>()?;

    let mut outcome = RemoteOutcome::default();
    for (job, fetch) in jobs.iter().zip(run_jobs(transport, config, &jobs)?) {
        let i = job.members[0];
        let body = match fetch {
            Fetch::Body(body) => body,
            Fetch::Failed(reason) => {
                outcome.failures.push(TermFailure {
                    source_index: i,
                    reason,
                });
                continue;
            }
        };
        let parsed: Vec<serde_json::Value> = match serde_json::from_slice(&body) {
            Ok(v) => v,
            Err(e) => {
                outcome.failures.push(TermFailure {
                    source_index: i,
                    reason: format!("unreadable response: {e}"),
                });
                continue;
            }
        };
        for raw in parsed {
            let Ok(annotation) = serde_json::from_value::<Annotation>(raw.clone()) else {
                continue;
            };
            let level = annotation.confidence.unwrap_or_default();
            let score = confidence_score(&level).unwrap_or_else(|| {
                let message = format!("unknown confidence '{level}' for '{}', scored 0.25", terms[i].text);
                warn!("{message}");
                outcome.warnings.push(message);
                0.25
            });
            let label = annotation
                .annotated_property
                .and_then(|p| p.property_value)
                .unwrap_or_default();
            for iri in annotation.semantic_tags {
                outcome.annotations.push(RemoteAnnotation {
                    source_index: i,
                    source_text: terms[i].text.clone(),
                    ontology_acronym: acronym_of(&iri),
                    term_iri: iri,
                    term_label: label.clone(),
                    score,
                    raw_payload: raw.to_string(),
                });
            }
        }
    }
    Ok(outcome)
}
