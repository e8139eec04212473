use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::table::MappingTable;
use crate::ontology::{HierarchyIndex, Ontology};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: String,
    pub iri: String,
    pub label: String,
}

/// A direct `child is_a parent` edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphLink {
    pub source: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermGraph {
    pub nodes: Vec<GraphNode>,
    pub links: Vec<GraphLink>,
}

/// Node-link graphs keyed by the CURIE of each mapped term.
pub type TermGraphs = BTreeMap<String, TermGraph>;

/// The term, every ancestor and its direct children, with the direct parent
/// edges among them.
pub fn term_graph(iri: &str, ontology: &Ontology, hierarchy: &HierarchyIndex) -> Option<TermGraph> {
    let iri = hierarchy.resolve(iri)?;
    let mut members: BTreeSet<&str> = BTreeSet::new();
    members.insert(iri);
    members.extend(hierarchy.ancestors(iri));
    members.extend(hierarchy.direct_children(iri));

    let curie = |id: &str| ontology.get(id).map_or_else(|| id.to_string(), |t| t.curie.clone());
    let nodes = members
        .iter()
        .map(|&id| GraphNode {
            id: curie(id),
            iri: id.to_string(),
            label: ontology
                .get(id)
                .map(|t| t.display_label().to_string())
                .unwrap_or_default(),
        })
        .collect();
    let mut links = Vec::new();
    for &child in &members {
        for parent in hierarchy.direct_parents(child) {
            if members.contains(parent) {
                links.push(GraphLink {
                    source: curie(child),
                    target: curie(parent),
                });
            }
        }
    }
    Some(TermGraph { nodes, links })
}

pub fn export_term_graphs(table: &MappingTable, ontology: &Ontology, hierarchy: &HierarchyIndex) -> TermGraphs {
    let mut graphs = TermGraphs::new();
    for target in table.rows.iter().filter_map(|r| r.target.as_ref()) {
        if graphs.contains_key(&target.curie) {
            continue;
        }
        if let Some(graph) = term_graph(&target.iri, ontology, hierarchy) {
            graphs.insert(target.curie.clone(), graph);
        }
    }
    graphs
}
