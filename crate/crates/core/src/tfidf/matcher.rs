use std::collections::HashMap;

use super::{build_tfidf_index, tfidf_topn_vectors, SparseVec, TfidfError, TfidfIndex};
use crate::candidate::Candidate;
use crate::ontology::{OntologyTerm, TermSet};
use crate::preprocess::SourceTerm;

/// A TF-IDF index plus the terms its documents belong to.
pub struct TfidfMatcher<'a> {
    terms: Vec<&'a OntologyTerm>,
    index: TfidfIndex,
    /// Largest number of documents owned by a single term.
    max_docs_per_term: usize,
}

impl<'a> TfidfMatcher<'a> {
    pub fn new(corpus: &TermSet<'a>, ngram_size: usize, include_broad: bool) -> Result<Self, TfidfError> {
        let index = build_tfidf_index(corpus, ngram_size, include_broad)?;
        let mut per_term = vec![0usize; corpus.len()];
        for doc in index.documents() {
            per_term[doc.owner_index] += 1;
        }
        Ok(TfidfMatcher {
            terms: corpus.terms().to_vec(),
            max_docs_per_term: per_term.into_iter().max().unwrap_or(1),
            index,
        })
    }

    pub fn index(&self) -> &TfidfIndex {
        &self.index
    }

    /// Term-level candidates for normalized queries: a term scores the best
    /// of its documents; at most `max_mappings` per query, best first, ties
    /// by ascending IRI.
    pub fn match_normalized(&self, queries: &[&str], max_mappings: usize, min_score: f64) -> Vec<Vec<Candidate<'a>>> {
        if max_mappings == 0 {
            return vec![Vec::new(); queries.len()];
        }
        // Identical queries are vectorized and searched once.
        let mut slots: HashMap<&str, usize> = HashMap::new();
        let mut unique: Vec<&str> = Vec::new();
        let positions: Vec<usize> = queries
            .iter()
            .map(|q| {
                *slots.entry(q).or_insert_with(|| {
                    unique.push(q);
                    unique.len() - 1
                })
            })
            .collect();
        let vectors: Vec<SparseVec> = unique.iter().map(|q| self.index.vectorize(q)).collect();

        // Enough documents that `max_mappings` distinct terms survive the collapse.
        let depth = (max_mappings - 1) * self.max_docs_per_term + 1;
        let hits = tfidf_topn_vectors(&self.index, &vectors, depth, min_score);

        let collapsed: Vec<Vec<Candidate<'a>>> = hits
            .into_iter()
            .map(|doc_hits| {
                let mut out: Vec<Candidate<'a>> = Vec::new();
                let mut seen: Vec<usize> = Vec::new();
                // Hits are best first, so the first document seen per term is its best.
                for hit in doc_hits {
                    let doc = &self.index.documents()[hit.row];
                    if seen.contains(&doc.owner_index) {
                        continue;
                    }
                    seen.push(doc.owner_index);
                    out.push(Candidate {
                        term: self.terms[doc.owner_index],
                        score: hit.score,
                        matched_string: doc.original.clone(),
                    });
                }
                out.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.term.iri.cmp(&b.term.iri)));
                out.truncate(max_mappings);
                out
            })
            .collect();
        positions.into_iter().map(|p| collapsed[p].clone()).collect()
    }
}

/// Maps source terms against a corpus with a fresh index.
pub fn tfidf_match<'a>(
    queries: &[SourceTerm],
    corpus: &TermSet<'a>,
    ngram_size: usize,
    include_broad: bool,
    max_mappings: usize,
    min_score: f64,
) -> Result<Vec<Vec<Candidate<'a>>>, TfidfError> {
    let matcher = TfidfMatcher::new(corpus, ngram_size, include_broad)?;
    let normalized: Vec<&str> = queries.iter().map(|q| q.normalized.as_str()).collect();
    Ok(matcher.match_normalized(&normalized, max_mappings, min_score))
}
