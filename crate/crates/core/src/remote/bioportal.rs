use serde::Deserialize;
use url::Url;

use super::{
    acronym_of, run_jobs, Fetch, HttpRequest, Job, RemoteAnnotation, RemoteConfig, RemoteError, RemoteOutcome,
    TermFailure, Transport,
};
use crate::preprocess::SourceTerm;

pub const BIOPORTAL_BASE_URL: &str = "https://data.bioontology.org";
pub const BIOPORTAL_API_KEY_ENV: &str = "BIOPORTAL_API_KEY";

#[derive(Deserialize)]
struct Annotation {
    #[serde(rename = "annotatedClass")]
    annotated_class: AnnotatedClass,
    #[serde(default)]
    annotations: Vec<Span>,
}

#[derive(Deserialize)]
struct AnnotatedClass {
    #[serde(rename = "@id")]
    id: String,
    #[serde(rename = "prefLabel", default)]
    pref_label: Option<String>,
    #[serde(default)]
    links: Option<Links>,
}

#[derive(Deserialize)]
struct Links {
    ontology: Option<String>,
}

#[derive(Deserialize)]
struct Span {
    from: usize,
}

/// 1-based character ranges of each line in a newline-joined batch.
fn line_ranges(texts: &[&str]) -> Vec<(usize, usize)> {
    let mut start = 1;
    texts
        .iter()
        .map(|t| {
            let len = t.chars().count();
            let range = (start, start + len.saturating_sub(1));
            start += len + 1;
            range
        })
        .collect()
}

/// Annotates source terms with a BioPortal-style annotator.
///
/// Terms are sent in newline-joined batches and each annotation is attributed
/// back to the line containing its first match position. Every annotation
/// scores 1.0.
pub fn bioportal_annotate(
    terms: &[SourceTerm],
    config: &RemoteConfig,
    transport: &dyn Transport,
) -> Result<RemoteOutcome, RemoteError> {
    let api_key = config
        .api_key
        .as_deref()
        .filter(|k| !k.trim().is_empty())
        .ok_or(RemoteError::MissingApiKey)?;
    let endpoint = format!("{}/annotator", config.base_url.trim_end_matches('/'));
    let ontologies = config.ontology_list();

    let mut jobs = Vec::new();
    let indices: Vec<usize> = (0..terms.len()).collect();
    for batch in indices.chunks(config.batch_size.max(1)) {
        let text = batch
            .iter()
            .map(|&i| terms[i].text.trim())
            .collect::<Vec<_>>()
            .join("\n");
        let mut params = vec![("text", text), ("include", "prefLabel".to_string())];
        if let Some(list) = &ontologies {
            params.push(("ontologies", list.join(",")));
        }
        let url = Url::parse_with_params(&endpoint, &params).map_err(|_| RemoteError::BadUrl(endpoint.clone()))?;
        jobs.push(Job {
            request: HttpRequest {
                url: url.into(),
                headers: vec![("Authorization".into(), format!("apikey token={api_key}"))],
            },
            members: batch.to_vec(),
        });
    }

    let mut outcome = RemoteOutcome::default();
    for (job, fetch) in jobs.iter().zip(run_jobs(transport, config, &jobs)?) {
        let body = match fetch {
            Fetch::Body(body) => body,
            Fetch::Failed(reason) => {
                outcome.failures.extend(job.members.iter().map(|&i| TermFailure {
                    source_index: i,
                    reason: reason.clone(),
                }));
                continue;
            }
        };
        let parsed: Vec<serde_json::Value> = match serde_json::from_slice(&body) {
            Ok(v) => v,
            Err(e) => {
                outcome.failures.extend(job.members.iter().map(|&i| TermFailure {
                    source_index: i,
                    reason: format!("unreadable response: {e}"),
                }));
                continue;
            }
        };
        let texts: Vec<&str> = job.members.iter().map(|&i| terms[i].text.trim()).collect();
        let ranges = line_ranges(&texts);
        for raw in parsed {
            let Ok(annotation) = serde_json::from_value::<Annotation>(raw.clone()) else {
                outcome.warnings.push("skipped an annotation without a class id".into());
                continue;
            };
            let acronym = annotation
                .annotated_class
                .links
                .as_ref()
                .and_then(|l| l.ontology.as_deref())
                .and_then(|o| o.rsplit('/').next())
                .map(str::to_string)
                .unwrap_or_else(|| acronym_of(&annotation.annotated_class.id));
            let mut lines: Vec<usize> = annotation
                .annotations
                .iter()
                .filter_map(|span| ranges.iter().position(|&(a, b)| (a..=b).contains(&span.from)))
                .collect();
            lines.sort_unstable();
            lines.dedup();
            for line in lines {
                let source_index = job.members[line];
                outcome.annotations.push(RemoteAnnotation {
                    source_index,
                    source_text: terms[source_index].text.clone(),
                    term_iri: annotation.annotated_class.id.clone(),
                    term_label: annotation.annotated_class.pref_label.clone().unwrap_or_default(),
                    ontology_acronym: acronym.clone(),
                    score: 1.0,
                    raw_payload: raw.to_string(),
                });
            }
        }
    }
    outcome.annotations.sort_by_key(|a| a.source_index);
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::super::testing::*;
    use super::*;

    fn terms(texts: &[&str]) -> Vec<SourceTerm> {
        texts.iter().map(|t| SourceTerm::new(*t)).collect()
    }

    fn keyed(base: &str, ontologies: &str) -> RemoteConfig {
        RemoteConfig {
            api_key: Some("secret".into()),
            ..fast(base, ontologies)
        }
    }

    const ONE: &str = r#"[{"annotatedClass":{"@id":"http://www.ebi.ac.uk/efo/EFO_0003777","prefLabel":"heart disease",
        "links":{"ontology":"https://data.bioontology.org/ontologies/EFO"}},
        "annotations":[{"from":1,"to":13,"matchType":"PREF","text":"HEART DISEASE"}]}]"#;

    #[test]
    fn single_annotation_scores_one() {
        let t = Scripted::new(vec![Ok(ok(ONE))]);
        let out = bioportal_annotate(&terms(&["heart disease"]), &keyed("http://bp", "EFO"), &t).unwrap();
        assert_eq!(out.annotations.len(), 1);
        let a = &out.annotations[0];
        assert_eq!(
            (a.score, a.ontology_acronym.as_str(), a.term_label.as_str()),
            (1.0, "EFO", "heart disease")
        );
        let request = &t.requests.lock().unwrap()[0];
        assert_eq!(
            request.headers,
            [("Authorization".to_string(), "apikey token=secret".to_string())]
        );
    }

    #[test]
    fn ontology_parameter_lists_acronyms() {
        let t = Scripted::new(vec![]);
        bioportal_annotate(&terms(&["x"]), &keyed("http://bp/", "EFO,HPO"), &t).unwrap();
        let url = Url::parse(&t.urls()[0]).unwrap();
        let params: Vec<(String, String)> = url.query_pairs().into_owned().collect();
        assert!(params.contains(&("ontologies".into(), "EFO,HPO".into())));
        assert_eq!(url.path(), "/annotator");

        let t = Scripted::new(vec![]);
        bioportal_annotate(&terms(&["x"]), &keyed("http://bp", "all"), &t).unwrap();
        assert!(!t.urls()[0].contains("ontologies="));
    }

    #[test]
    fn batch_offsets_attribute_to_lines() {
        let body = r#"[
            {"annotatedClass":{"@id":"http://purl.obolibrary.org/obo/HP_1"},"annotations":[{"from":8}]},
            {"annotatedClass":{"@id":"http://purl.obolibrary.org/obo/HP_2"},"annotations":[{"from":1},{"from":10}]}
        ]"#;
        let t = Scripted::new(vec![Ok(ok(body))]);
        // "asthma" occupies 1..=6, "cough" 8..=12.
        let out = bioportal_annotate(&terms(&["asthma", "cough"]), &keyed("http://bp", "HP"), &t).unwrap();
        let got: Vec<(usize, &str)> = out
            .annotations
            .iter()
            .map(|a| (a.source_index, a.term_iri.as_str()))
            .collect();
        assert_eq!(
            got,
            [
                (0, "http://purl.obolibrary.org/obo/HP_2"),
                (1, "http://purl.obolibrary.org/obo/HP_1"),
                (1, "http://purl.obolibrary.org/obo/HP_2"),
            ]
        );
        assert_eq!(out.annotations[0].ontology_acronym, "HP");
        assert_eq!(t.urls().len(), 1);
    }

    #[test]
    fn missing_key_and_exhausted_batches() {
        let t = Scripted::new(vec![]);
        assert_eq!(
            bioportal_annotate(&terms(&["x"]), &fast("http://bp", "all"), &t).unwrap_err(),
            RemoteError::MissingApiKey
        );
        let t = Scripted::new(vec![Ok(status(502)); 20]);
        let config = RemoteConfig {
            max_retries: 1,
            batch_size: 1,
            ..keyed("http://bp", "all")
        };
        let out = bioportal_annotate(&terms(&["a", "b"]), &config, &t).unwrap();
        assert_eq!(out.failures.iter().map(|f| f.source_index).collect::<Vec<_>>(), [0, 1]);
        assert!(out.annotations.is_empty());
    }

    #[test]
    fn forbidden_is_credential_error() {
        let t = Scripted::new(vec![Ok(status(403))]);
        assert_eq!(
            bioportal_annotate(&terms(&["x"]), &keyed("http://bp", "all"), &t).unwrap_err(),
            RemoteError::Credential { status: 403 }
        );
    }
}
