use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::{SparseVec, TfidfIndex};

/// One document proposed for a query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DocHit {
    pub row: usize,
    pub score: f64,
}

/// Per query, hits sorted by descending score then ascending row.
pub type CandidateMatrix = Vec<Vec<DocHit>>;

/// Heap entry ordered so that the worst hit sits on top.
struct Worst(DocHit);

impl PartialEq for Worst {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Worst {}

impl PartialOrd for Worst {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Worst {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .score
            .total_cmp(&self.0.score)
            .then(self.0.row.cmp(&other.0.row))
    }
}

struct Scratch {
    acc: Vec<f64>,
    touched: Vec<u32>,
}

fn top_for_query(
    index: &TfidfIndex,
    query: &SparseVec,
    top_n: usize,
    min_score: f64,
    scratch: &mut Scratch,
) -> Vec<DocHit> {
    if top_n == 0 || query.is_empty() {
        return Vec::new();
    }
    let columns = index.columns();
    for (&col, &q) in query.indices.iter().zip(&query.values) {
        let (rows, vals) = columns.lane(col as usize);
        for (&row, &d) in rows.iter().zip(vals) {
            let slot = &mut scratch.acc[row as usize];
            if *slot == 0.0 {
                scratch.touched.push(row);
            }
            *slot += q * d;
        }
    }

    let mut heap: BinaryHeap<Worst> = BinaryHeap::with_capacity(top_n + 1);
    for &row in &scratch.touched {
        let score = scratch.acc[row as usize].min(1.0);
        scratch.acc[row as usize] = 0.0;
        if score < min_score || score <= 0.0 {
            continue;
        }
        let hit = Worst(DocHit {
            row: row as usize,
            score,
        });
        if heap.len() < top_n {
            heap.push(hit);
        } else if let Some(mut top) = heap.peek_mut() {
            if hit < *top {
                *top = hit;
            }
        }
    }
    scratch.touched.clear();
    // Ascending `Worst` order is best first.
    heap.into_sorted_vec().into_iter().map(|w| w.0).collect()
}

/// Top-n document hits for pre-vectorized queries.
pub fn tfidf_topn_vectors(index: &TfidfIndex, queries: &[SparseVec], top_n: usize, min_score: f64) -> CandidateMatrix {
    let rows = index.len();
    queries
        .par_iter()
        .map_init(
            || Scratch {
                acc: vec![0.0; rows],
                touched: Vec::new(),
            },
            |scratch, q| top_for_query(index, q, top_n, min_score, scratch),
        )
        .collect()
}

/// Top-n document hits for normalized query strings.
pub fn tfidf_topn<S: AsRef<str> + Sync>(
    index: &TfidfIndex,
    queries: &[S],
    top_n: usize,
    min_score: f64,
) -> CandidateMatrix {
    let vectors: Vec<SparseVec> = queries.par_iter().map(|q| index.vectorize(q.as_ref())).collect();
    tfidf_topn_vectors(index, &vectors, top_n, min_score)
}

#[cfg(test)]
mod tests {
    use super::super::{DocOrigin, Document};
    use super::*;
    use crate::preprocess::normalize;
    use approx::assert_abs_diff_eq;

    fn index(texts: &[&str], n: usize) -> TfidfIndex {
        let docs = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Document {
                text: normalize(t),
                original: t.to_string(),
                owner: format!("EX:{i}"),
                owner_index: i,
                origin: DocOrigin::Label,
            })
            .collect();
        TfidfIndex::from_documents(docs, n).unwrap()
    }

    #[test]
    fn identical_query_ranks_first() {
        let idx = index(&["heart disease", "heart failure", "lung disease"], 3);
        let hits = &tfidf_topn(&idx, &["heart failure"], 3, 0.0)[0];
        assert_eq!(hits[0].row, 1);
        assert_abs_diff_eq!(hits[0].score, 1.0, epsilon = 1e-9);
        assert!(hits.windows(2).all(|w| w[0].score >= w[1].score));
    }

    #[test]
    fn threshold_and_oov() {
        let idx = index(&["heart disease", "lung disease"], 3);
        assert!(tfidf_topn(&idx, &["kidney stone"], 5, 0.99)[0].is_empty());
        assert!(tfidf_topn(&idx, &["qqqq"], 5, 0.0)[0].is_empty());
        assert!(tfidf_topn(&idx, &["heart"], 0, 0.0)[0].is_empty());
    }

    #[test]
    fn ties_prefer_lower_rows() {
        let idx = index(&["same", "other", "same"], 3);
        let hits = &tfidf_topn(&idx, &["same"], 1, 0.0)[0];
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].row, 0);
        let both = &tfidf_topn(&idx, &["same"], 2, 0.0)[0];
        assert_eq!((both[0].row, both[1].row), (0, 2));
        assert_eq!(both[0].score, both[1].score);
    }

    #[test]
    fn scratch_is_reset_between_queries() {
        let idx = index(&["abc", "abd", "xyz"], 2);
        let queries = ["abc", "xyz", "abc"];
        let out = tfidf_topn(&idx, &queries, 3, 0.0);
        assert_eq!(out[0], out[2]);
        assert_eq!(out[1][0].row, 2);
    }
}
