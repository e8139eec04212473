//! Transitive closure over asserted parent edges.

use std::collections::HashMap;

use log::warn;

use super::Ontology;

/// Ancestor/descendant closure of an ontology's asserted hierarchy.
///
/// Terms are indexed in ascending IRI order, so every set returned by the
/// accessors is sorted by IRI. Parent edges that close a cycle are dropped
/// while the closure is built and are listed in [`HierarchyIndex::pruned_edges`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HierarchyIndex {
    iris: Vec<String>,
    lookup: HashMap<String, u32>,
    direct_parents: Vec<Vec<u32>>,
    direct_children: Vec<Vec<u32>>,
    ancestors: Vec<Vec<u32>>,
    descendants: Vec<Vec<u32>>,
    pruned: Vec<(String, String)>,
}

const WHITE: u8 = 0;
const GRAY: u8 = 1;
const BLACK: u8 = 2;

/// Builds the closure. Cycles are broken at the edge that closes them during
/// a depth-first walk in IRI order, so the result is deterministic.
pub fn build_hierarchy(ontology: &Ontology) -> HierarchyIndex {
    let iris: Vec<String> = ontology.terms.keys().cloned().collect();
    let mut lookup: HashMap<String, u32> = HashMap::with_capacity(iris.len() * 2);
    for (i, term) in ontology.terms.values().enumerate() {
        lookup.insert(term.iri.clone(), i as u32);
    }
    for (i, term) in ontology.terms.values().enumerate() {
        lookup.entry(term.curie.clone()).or_insert(i as u32);
    }

    let asserted: Vec<Vec<u32>> = ontology
        .terms
        .values()
        .map(|t| {
            let mut ps: Vec<u32> = t
                .parents
                .iter()
                .filter(|&p| ontology.terms.contains_key(p))
                .map(|p| lookup[p.as_str()])
                .collect();
            ps.sort_unstable();
            ps
        })
        .collect();

    let n = iris.len();
    let mut color = vec![WHITE; n];
    let mut kept: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut ancestors: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut pruned = Vec::new();
    // (node, index of next parent to visit)
    let mut stack: Vec<(u32, usize)> = Vec::new();

    for root in 0..n as u32 {
        if color[root as usize] != WHITE {
            continue;
        }
        color[root as usize] = GRAY;
        stack.push((root, 0));
        while let Some(top) = stack.len().checked_sub(1) {
            let (node, next) = stack[top];
            let parents = &asserted[node as usize];
            if next < parents.len() {
                let parent = parents[next];
                stack[top].1 += 1;
                match color[parent as usize] {
                    GRAY => {
                        warn!(
                            "cycle detected: ignoring edge {} -> {}",
                            iris[node as usize], iris[parent as usize]
                        );
                        pruned.push((iris[node as usize].clone(), iris[parent as usize].clone()));
                    }
                    WHITE => {
                        kept[node as usize].push(parent);
                        color[parent as usize] = GRAY;
                        stack.push((parent, 0));
                    }
                    _ => kept[node as usize].push(parent),
                }
            } else {
                stack.pop();
                // Every kept parent is finished at this point.
                let mut acc: Vec<u32> = Vec::new();
                for &p in &kept[node as usize] {
                    acc.push(p);
                    acc.extend_from_slice(&ancestors[p as usize]);
                }
                acc.sort_unstable();
                acc.dedup();
                ancestors[node as usize] = acc;
                color[node as usize] = BLACK;
            }
        }
    }

    let mut descendants: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut direct_children: Vec<Vec<u32>> = vec![Vec::new(); n];
    for node in 0..n {
        for &a in &ancestors[node] {
            descendants[a as usize].push(node as u32);
        }
        for &p in &kept[node] {
            direct_children[p as usize].push(node as u32);
        }
    }
    for parents in &mut kept {
        parents.sort_unstable();
    }

    HierarchyIndex {
        iris,
        lookup,
        direct_parents: kept,
        direct_children,
        ancestors,
        descendants,
        pruned,
    }
}

impl HierarchyIndex {
    fn index(&self, id: &str) -> Option<usize> {
        self.lookup.get(id).map(|&i| i as usize)
    }

    fn names(&self, ids: &[u32]) -> Vec<&str> {
        ids.iter().map(|&i| self.iris[i as usize].as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.iris.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iris.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.lookup.contains_key(id)
    }

    /// Canonical IRI for an IRI or CURIE known to the index.
    pub fn resolve(&self, id: &str) -> Option<&str> {
        self.index(id).map(|i| self.iris[i].as_str())
    }

    pub fn ancestors(&self, id: &str) -> Vec<&str> {
        self.index(id)
            .map(|i| self.names(&self.ancestors[i]))
            .unwrap_or_default()
    }

    pub fn descendants(&self, id: &str) -> Vec<&str> {
        self.index(id)
            .map(|i| self.names(&self.descendants[i]))
            .unwrap_or_default()
    }

    pub fn direct_parents(&self, id: &str) -> Vec<&str> {
        self.index(id)
            .map(|i| self.names(&self.direct_parents[i]))
            .unwrap_or_default()
    }

    pub fn direct_children(&self, id: &str) -> Vec<&str> {
        self.index(id)
            .map(|i| self.names(&self.direct_children[i]))
            .unwrap_or_default()
    }

    /// True when `ancestor` is a strict transitive ancestor of `term`.
    pub fn is_ancestor(&self, ancestor: &str, term: &str) -> bool {
        match (self.index(ancestor), self.index(term)) {
            (Some(a), Some(t)) => self.ancestors[t].binary_search(&(a as u32)).is_ok(),
            _ => false,
        }
    }

    pub fn share_direct_parent(&self, a: &str, b: &str) -> bool {
        match (self.index(a), self.index(b)) {
            (Some(a), Some(b)) => {
                let (pa, pb) = (&self.direct_parents[a], &self.direct_parents[b]);
                pa.iter().any(|p| pb.binary_search(p).is_ok())
            }
            _ => false,
        }
    }

    /// Edges `(child, parent)` that were ignored to break cycles.
    pub fn pruned_edges(&self) -> &[(String, String)] {
        &self.pruned
    }
}
