use std::collections::BTreeMap;

use log::warn;
use serde::Deserialize;

use super::{IngestError, Ontology, OntologyTerm, TermType};

#[derive(Deserialize)]
struct GraphDocument {
    #[serde(default)]
    graphs: Vec<Graph>,
}

#[derive(Deserialize)]
struct Graph {
    #[serde(default)]
    meta: Option<Meta>,
    #[serde(default)]
    nodes: Vec<RawNode>,
    #[serde(default)]
    edges: Vec<RawEdge>,
}

#[derive(Deserialize)]
struct RawNode {
    id: Option<String>,
    lbl: Option<String>,
    #[serde(rename = "type")]
    node_type: Option<String>,
    meta: Option<Meta>,
}

#[derive(Deserialize, Default)]
#[serde(rename_all = "camelCase")]
struct Meta {
    definition: Option<Definition>,
    #[serde(default)]
    synonyms: Vec<Synonym>,
    #[serde(default)]
    basic_property_values: Vec<PropertyValue>,
    #[serde(default)]
    deprecated: Option<bool>,
    version: Option<String>,
}

#[derive(Deserialize)]
struct Definition {
    val: Option<String>,
}

#[derive(Deserialize)]
struct Synonym {
    pred: Option<String>,
    val: Option<String>,
}

#[derive(Deserialize)]
struct PropertyValue {
    pred: Option<String>,
    val: Option<String>,
}

#[derive(Deserialize)]
struct RawEdge {
    sub: Option<String>,
    pred: Option<String>,
    obj: Option<String>,
}

/// A node that could not be turned into a term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordError {
    pub graph: usize,
    pub node: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub record_errors: Vec<RecordError>,
    /// Nodes skipped because they are neither classes nor properties.
    pub skipped_nodes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Annotation {
    PrefLabel,
    AlternativeTerm,
    Definition,
    VersionInfo,
    Other,
}

fn classify_property(pred: &str) -> Annotation {
    let local = pred.rsplit(['/', '#']).next().unwrap_or(pred);
    match pred {
        "skos:prefLabel" => return Annotation::PrefLabel,
        "NCIT:P90" | "EFO:alternative_term" | "efo:alternative_term" => return Annotation::AlternativeTerm,
        "IAO:0000115" | "skos:definition" => return Annotation::Definition,
        "owl:versionInfo" => return Annotation::VersionInfo,
        _ => {}
    }
    if !pred.contains("://") {
        return Annotation::Other;
    }
    if pred.contains("skos/core#") && local == "prefLabel" {
        Annotation::PrefLabel
    } else if local == "P90" || local == "NCIT_P90" || (pred.contains("/efo/") && local == "alternative_term") {
        Annotation::AlternativeTerm
    } else if local == "IAO_0000115" || (pred.contains("skos/core#") && local == "definition") {
        Annotation::Definition
    } else if local == "versionInfo" {
        Annotation::VersionInfo
    } else {
        Annotation::Other
    }
}

fn synonym_scope(pred: &str) -> Option<bool> {
    let local = pred.rsplit(['/', '#', ':']).next().unwrap_or(pred);
    match local {
        "hasExactSynonym" => Some(true),
        "hasBroadSynonym" => Some(false),
        _ => None,
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum EdgeKind {
    SubClass,
    SubProperty,
    InstanceOf,
}

fn edge_kind(pred: &str) -> Option<EdgeKind> {
    match pred {
        "is_a" | "rdfs:subClassOf" | "http://www.w3.org/2000/01/rdf-schema#subClassOf" => Some(EdgeKind::SubClass),
        "subPropertyOf" | "rdfs:subPropertyOf" | "http://www.w3.org/2000/01/rdf-schema#subPropertyOf" => {
            Some(EdgeKind::SubProperty)
        }
        "rdf:type" | "type" | "instance_of" | "http://www.w3.org/1999/02/22-rdf-syntax-ns#type" => {
            Some(EdgeKind::InstanceOf)
        }
        _ => None,
    }
}

fn push_unique(list: &mut Vec<String>, value: &str) {
    let value = value.trim();
    if !value.is_empty() && !list.iter().any(|v| v == value) {
        list.push(value.to_string());
    }
}

fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    let mut current = 1;
    let mut start = 0;
    if line > 1 {
        for (i, b) in bytes.iter().enumerate() {
            if *b == b'\n' {
                current += 1;
                if current == line {
                    start = i + 1;
                    break;
                }
            }
        }
    }
    (start + column.saturating_sub(1)).min(bytes.len())
}

fn apply_meta(term: &mut OntologyTerm, meta: &Meta) {
    if let Some(val) = meta.definition.as_ref().and_then(|d| d.val.as_deref()) {
        push_unique(&mut term.definitions, val);
    }
    for synonym in &meta.synonyms {
        let (Some(pred), Some(val)) = (synonym.pred.as_deref(), synonym.val.as_deref()) else {
            continue;
        };
        match synonym_scope(pred) {
            Some(true) => push_unique(&mut term.exact_synonyms, val),
            Some(false) => push_unique(&mut term.broad_synonyms, val),
            None => {}
        }
    }
    for pv in &meta.basic_property_values {
        let (Some(pred), Some(val)) = (pv.pred.as_deref(), pv.val.as_deref()) else {
            continue;
        };
        match classify_property(pred) {
            Annotation::PrefLabel => push_unique(&mut term.labels, val),
            Annotation::AlternativeTerm => push_unique(&mut term.exact_synonyms, val),
            Annotation::Definition => push_unique(&mut term.definitions, val),
            Annotation::VersionInfo | Annotation::Other => {}
        }
    }
    if meta.deprecated == Some(true) {
        term.deprecated = true;
    }
}

/// Parses an OBO Graph JSON document into an [`Ontology`].
pub fn parse_obograph(bytes: &[u8]) -> Result<Ontology, IngestError> {
    parse_obograph_with_report(bytes).map(|(ontology, report)| {
        if !report.record_errors.is_empty() {
            warn!("skipped {} malformed node(s)", report.record_errors.len());
        }
        ontology
    })
}

/// Like [`parse_obograph`], also returning the per-record problems found.
pub fn parse_obograph_with_report(bytes: &[u8]) -> Result<(Ontology, IngestReport), IngestError> {
    let document: GraphDocument = serde_json::from_slice(bytes).map_err(|e| IngestError::Malformed {
        offset: byte_offset(bytes, e.line(), e.column()),
        message: e.to_string(),
    })?;

    let mut report = IngestReport::default();
    let mut terms: BTreeMap<String, OntologyTerm> = BTreeMap::new();
    let mut version_info = None;

    for (g, graph) in document.graphs.iter().enumerate() {
        if let Some(meta) = &graph.meta {
            if version_info.is_none() {
                version_info = meta
                    .basic_property_values
                    .iter()
                    .find(|pv| pv.pred.as_deref().map(classify_property) == Some(Annotation::VersionInfo))
                    .and_then(|pv| pv.val.clone())
                    .or_else(|| meta.version.clone());
            }
        }
        for (n, node) in graph.nodes.iter().enumerate() {
            let Some(id) = node.id.as_deref().map(str::trim).filter(|id| !id.is_empty()) else {
                report.record_errors.push(RecordError {
                    graph: g,
                    node: n,
                    message: "node has no id".to_string(),
                });
                continue;
            };
            let term_type = match node.node_type.as_deref() {
                Some("CLASS") => TermType::Class,
                Some("PROPERTY") => TermType::Property,
                _ => {
                    report.skipped_nodes += 1;
                    continue;
                }
            };
            let term = terms
                .entry(id.to_string())
                .or_insert_with(|| OntologyTerm::new(id, term_type));
            if let Some(lbl) = node.lbl.as_deref() {
                // `lbl` goes first so it stays the display label.
                let lbl = lbl.trim();
                if !lbl.is_empty() && !term.labels.iter().any(|l| l == lbl) {
                    term.labels.insert(0, lbl.to_string());
                }
            }
            if let Some(meta) = &node.meta {
                apply_meta(term, meta);
            }
        }
    }

    if terms.is_empty() {
        return Err(IngestError::EmptyOntology);
    }

    for graph in &document.graphs {
        for edge in &graph.edges {
            let (Some(sub), Some(pred), Some(obj)) = (edge.sub.as_deref(), edge.pred.as_deref(), edge.obj.as_deref())
            else {
                continue;
            };
            match edge_kind(pred) {
                Some(EdgeKind::SubClass) => {
                    if let Some(t) = terms.get_mut(sub).filter(|t| t.term_type == TermType::Class) {
                        if sub != obj {
                            t.parents.insert(obj.to_string());
                        }
                    }
                }
                Some(EdgeKind::SubProperty) => {
                    if let Some(t) = terms.get_mut(sub).filter(|t| t.term_type == TermType::Property) {
                        if sub != obj {
                            t.parents.insert(obj.to_string());
                        }
                    }
                }
                Some(EdgeKind::InstanceOf) => {
                    if let Some(t) = terms.get_mut(obj).filter(|t| t.term_type == TermType::Class) {
                        t.instances.insert(sub.to_string());
                    }
                }
                None => {}
            }
        }
    }

    let mut ontology = Ontology {
        terms,
        version_info,
        ..Default::default()
    };
    ontology.link_children();
    Ok((ontology, report))
}
