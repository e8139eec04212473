//! Character n-gram TF-IDF index and top-n cosine retrieval.
//!
//! Each label or synonym of a term is one document. Documents and queries are
//! normalized, padded with one space on each side and cut into overlapping
//! character n-grams. Weights are `tf · idf` with
//! `idf(g) = ln((1 + N) / (1 + df(g))) + 1`, and every row is L2-normalized,
//! so a dot product is a cosine.

mod kernel;
mod matcher;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::TermSet;
use crate::preprocess::normalize;

pub use kernel::{tfidf_topn, tfidf_topn_vectors, CandidateMatrix, DocHit};
pub use matcher::{tfidf_match, TfidfMatcher};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TfidfError {
    #[error("n-gram size must be at least 1")]
    NgramSize,
    #[error("corpus has no usable label or synonym strings")]
    EmptyIndex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DocOrigin {
    Label,
    ExactSynonym,
    BroadSynonym,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    /// Normalized text the vector was built from.
    pub text: String,
    /// The string as written in the ontology.
    pub original: String,
    pub owner: String,
    /// Position of the owning term in the corpus.
    pub owner_index: usize,
    pub origin: DocOrigin,
}

/// A sparse vector with strictly ascending column indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVec {
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseVec {
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Overlapping character n-grams of `text` after single-space padding.
///
/// A padded string shorter than `n` yields itself as its only gram, so very
/// short strings still get a vector.
pub fn char_ngrams(text: &str, n: usize) -> Vec<String> {
    let padded: Vec<char> = std::iter::once(' ')
        .chain(text.chars())
        .chain(std::iter::once(' '))
        .collect();
    if padded.len() < n {
        return vec![padded.into_iter().collect()];
    }
    padded.windows(n).map(|w| w.iter().collect()).collect()
}

fn gram_counts(text: &str, n: usize) -> BTreeMap<String, u32> {
    let mut counts = BTreeMap::new();
    for gram in char_ngrams(text, n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Compressed sparse rows (or columns, for the transpose).
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct Compressed {
    pub ptr: Vec<usize>,
    pub idx: Vec<u32>,
    pub val: Vec<f64>,
}

impl Compressed {
    fn lane(&self, i: usize) -> (&[u32], &[f64]) {
        let (a, b) = (self.ptr[i], self.ptr[i + 1]);
        (&self.idx[a..b], &self.val[a..b])
    }

    fn transpose(&self, lanes_out: usize) -> Compressed {
        let mut counts = vec![0usize; lanes_out + 1];
        for &c in &self.idx {
            counts[c as usize + 1] += 1;
        }
        for i in 0..lanes_out {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut idx = vec![0u32; self.idx.len()];
        let mut val = vec![0f64; self.val.len()];
        // Rows are visited in ascending order, so each column lists rows ascending.
        for row in 0..self.ptr.len() - 1 {
            let (cols, vals) = self.lane(row);
            for (&c, &v) in cols.iter().zip(vals) {
                let slot = &mut fill[c as usize];
                idx[*slot] = row as u32;
                val[*slot] = v;
                *slot += 1;
            }
        }
        Compressed { ptr: counts, idx, val }
    }
}

#[derive(Debug, Clone)]
pub struct TfidfIndex {
    documents: Vec<Document>,
    vocabulary: HashMap<String, u32>,
    idf: Vec<f64>,
    rows: Compressed,
    columns: Compressed,
    ngram_size: usize,
    /// Raw n-gram counts per row, kept so the weights can be rebuilt.
    counts: Compressed,
}

impl TfidfIndex {
    /// Builds an index over documents whose `text` is already normalized.
    /// Documents with empty text are dropped.
    pub fn from_documents(documents: Vec<Document>, ngram_size: usize) -> Result<Self, TfidfError> {
        if ngram_size == 0 {
            return Err(TfidfError::NgramSize);
        }
        let documents: Vec<Document> = documents.into_iter().filter(|d| !d.text.is_empty()).collect();
        if documents.is_empty() {
            return Err(TfidfError::EmptyIndex);
        }
        let per_doc: Vec<BTreeMap<String, u32>> = documents.iter().map(|d| gram_counts(&d.text, ngram_size)).collect();

        let mut df: BTreeMap<&str, u32> = BTreeMap::new();
        for counts in &per_doc {
            for gram in counts.keys() {
                *df.entry(gram.as_str()).or_insert(0) += 1;
            }
        }
        let n_docs = documents.len() as f64;
        let mut vocabulary = HashMap::with_capacity(df.len());
        let mut idf = Vec::with_capacity(df.len());
        for (column, (gram, freq)) in df.iter().enumerate() {
            vocabulary.insert(gram.to_string(), column as u32);
            idf.push(((1.0 + n_docs) / (1.0 + f64::from(*freq))).ln() + 1.0);
        }

        let mut counts = Compressed {
            ptr: vec![0],
            ..Default::default()
        };
        for doc in &per_doc {
            let mut entries: Vec<(u32, f64)> = doc
                .iter()
                .map(|(g, &c)| (vocabulary[g.as_str()], f64::from(c)))
                .collect();
            entries.sort_unstable_by_key(|e| e.0);
            for (c, v) in entries {
                counts.idx.push(c);
                counts.val.push(v);
            }
            counts.ptr.push(counts.idx.len());
        }

        let mut index = TfidfIndex {
            documents,
            vocabulary,
            idf,
            rows: Compressed::default(),
            columns: Compressed::default(),
            ngram_size,
            counts,
        };
        index.reweight();
        Ok(index)
    }

    fn reweight(&mut self) {
        let mut rows = self.counts.clone();
        for r in 0..rows.ptr.len() - 1 {
            let (a, b) = (rows.ptr[r], rows.ptr[r + 1]);
            for k in a..b {
                rows.val[k] *= self.idf[rows.idx[k] as usize];
            }
            let norm = rows.val[a..b].iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                for v in &mut rows.val[a..b] {
                    *v /= norm;
                }
            }
        }
        self.columns = rows.transpose(self.idf.len());
        self.rows = rows;
    }

    /// Multiplies every idf weight by `factor` and rebuilds the rows.
    pub fn scale_idf(&mut self, factor: f64) {
        for w in &mut self.idf {
            *w *= factor;
        }
        self.reweight();
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn ngram_size(&self) -> usize {
        self.ngram_size
    }

    pub fn vocabulary(&self) -> &HashMap<String, u32> {
        &self.vocabulary
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    /// The L2-normalized weight vector of one document.
    pub fn row(&self, row: usize) -> SparseVec {
        let (idx, val) = self.rows.lane(row);
        SparseVec {
            indices: idx.to_vec(),
            values: val.to_vec(),
        }
    }

    pub(crate) fn columns(&self) -> &Compressed {
        &self.columns
    }

    /// Vectorizes an already normalized query. Unknown n-grams are dropped.
    pub fn vectorize(&self, normalized: &str) -> SparseVec {
        let mut entries: Vec<(u32, f64)> = gram_counts(normalized, self.ngram_size)
            .into_iter()
            .filter_map(|(g, c)| {
                self.vocabulary
                    .get(&g)
                    .map(|&col| (col, f64::from(c) * self.idf[col as usize]))
            })
            .collect();
        entries.sort_unstable_by_key(|e| e.0);
        let norm = entries.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
        if norm == 0.0 {
            return SparseVec::default();
        }
        SparseVec {
            indices: entries.iter().map(|e| e.0).collect(),
            values: entries.iter().map(|e| e.1 / norm).collect(),
        }
    }
}

/// Documents for a term set: per term in IRI order, its labels, exact
/// synonyms and, optionally, broad synonyms. Repeats within a term are
/// dropped after normalization.
pub fn corpus_documents(corpus: &TermSet<'_>, include_broad: bool) -> Vec<Document> {
    let mut documents = Vec::new();
    for (owner_index, term) in corpus.iter().enumerate() {
        let mut seen: Vec<String> = Vec::new();
        let broad: &[String] = if include_broad { &term.broad_synonyms } else { &[] };
        let sources = term
            .labels
            .iter()
            .map(|s| (s, DocOrigin::Label))
            .chain(term.exact_synonyms.iter().map(|s| (s, DocOrigin::ExactSynonym)))
            .chain(broad.iter().map(|s| (s, DocOrigin::BroadSynonym)));
        for (original, origin) in sources {
            let text = normalize(original);
            if text.is_empty() || seen.contains(&text) {
                continue;
            }
            seen.push(text.clone());
            documents.push(Document {
                text,
                original: original.clone(),
                owner: term.iri.clone(),
                owner_index,
                origin,
            });
        }
    }
    documents
}

pub fn build_tfidf_index(
    corpus: &TermSet<'_>,
    ngram_size: usize,
    include_broad: bool,
) -> Result<TfidfIndex, TfidfError> {
    TfidfIndex::from_documents(corpus_documents(corpus, include_broad), ngram_size)
}
