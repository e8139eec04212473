//! Pairwise string-similarity metrics and exhaustive best-match search.
//!
//! Every metric returns a value in `[0, 1]`, where 1 means the strings are
//! identical (token sets equal, for Jaccard). Edit-based metrics operate on
//! Unicode scalar values.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::candidate::Candidate;
use crate::ontology::{OntologyTerm, TermSet};
use crate::preprocess::normalize;

#[derive(Debug, Error, PartialEq)]
pub enum SimilarityError {
    #[error("Jaro-Winkler prefix weight {0} exceeds 0.25")]
    PrefixWeight(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    Levenshtein,
    Jaro,
    JaroWinkler,
    Jaccard,
    Indel,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Levenshtein,
        Metric::Jaro,
        Metric::JaroWinkler,
        Metric::Jaccard,
        Metric::Indel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Levenshtein => "levenshtein",
            Metric::Jaro => "jaro",
            Metric::JaroWinkler => "jarowinkler",
            Metric::Jaccard => "jaccard",
            Metric::Indel => "indel",
        }
    }

    pub fn similarity(self, a: &str, b: &str) -> f64 {
        match self {
            Metric::Levenshtein => levenshtein_sim(a, b),
            Metric::Jaro => jaro_sim(a, b),
            Metric::JaroWinkler => jaro_winkler_sim(a, b),
            Metric::Jaccard => jaccard_sim(a, b),
            Metric::Indel => indel_sim(a, b),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| format!("unknown metric '{s}'"))
    }
}

pub fn levenshtein_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let above = row[j + 1];
            let cost = usize::from(ca != cb);
            row[j + 1] = (diag + cost).min(above + 1).min(row[j] + 1);
            diag = above;
        }
    }
    row[b.len()]
}

/// `1 - distance / max(|a|, |b|)`; two empty strings are identical.
pub fn levenshtein_sim(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein_distance(a, b) as f64 / longest as f64
}

pub fn lcs_length(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut row = vec![0usize; b.len() + 1];
    for ca in &a {
        let mut diag = 0;
        for (j, cb) in b.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = if ca == cb { diag + 1 } else { above.max(row[j]) };
            diag = above;
        }
    }
    row[b.len()]
}

/// `1 - (|a| + |b| - 2·LCS) / (|a| + |b|)`; two empty strings are identical.
pub fn indel_sim(a: &str, b: &str) -> f64 {
    let total = a.chars().count() + b.chars().count();
    if total == 0 {
        return 1.0;
    }
    let lcs = lcs_length(a, b);
    1.0 - (total - 2 * lcs) as f64 / total as f64
}

/// Jaro similarity.
///
/// Matching is greedy and depends on argument order in rare cases, so the
/// shorter string (then the lexicographically smaller) is always scanned
/// first. This makes the score symmetric.
pub fn jaro_sim(a: &str, b: &str) -> f64 {
    let mut a: Vec<char> = a.chars().collect();
    let mut b: Vec<char> = b.chars().collect();
    if (b.len(), &b) < (a.len(), &a) {
        std::mem::swap(&mut a, &mut b);
    }
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let window = (a.len().max(b.len()) / 2).saturating_sub(1);
    let mut b_used = vec![false; b.len()];
    let mut a_matches = Vec::with_capacity(a.len());
    for (i, ca) in a.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(b.len());
        for j in lo..hi {
            if !b_used[j] && b[j] == *ca {
                b_used[j] = true;
                a_matches.push(*ca);
                break;
            }
        }
    }
    let m = a_matches.len();
    if m == 0 {
        return 0.0;
    }
    let b_matches = b.iter().zip(&b_used).filter(|(_, used)| **used).map(|(c, _)| *c);
    let half_transpositions = a_matches.iter().zip(b_matches).filter(|(x, y)| **x != *y).count();
    let t = half_transpositions as f64 / 2.0;
    let m = m as f64;
    (m / a.len() as f64 + m / b.len() as f64 + (m - t) / m) / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JaroWinkler {
    prefix_weight: f64,
    max_prefix: usize,
}

impl Default for JaroWinkler {
    fn default() -> Self {
        JaroWinkler {
            prefix_weight: 0.1,
            max_prefix: 4,
        }
    }
}

impl JaroWinkler {
    /// Weights above 0.25 could push scores past 1 and are rejected.
    pub fn new(prefix_weight: f64, max_prefix: usize) -> Result<Self, SimilarityError> {
        if !(0.0..=0.25).contains(&prefix_weight) {
            return Err(SimilarityError::PrefixWeight(prefix_weight));
        }
        Ok(JaroWinkler {
            prefix_weight,
            max_prefix,
        })
    }

    pub fn similarity(&self, a: &str, b: &str) -> f64 {
        let jaro = jaro_sim(a, b);
        let prefix = a
            .chars()
            .zip(b.chars())
            .take_while(|(x, y)| x == y)
            .take(self.max_prefix)
            .count();
        jaro + prefix as f64 * self.prefix_weight * (1.0 - jaro)
    }
}

pub fn jaro_winkler_sim(a: &str, b: &str) -> f64 {
    JaroWinkler::default().similarity(a, b)
}

/// Token-set Jaccard over whitespace tokens of the normalized strings.
pub fn jaccard_sim(a: &str, b: &str) -> f64 {
    let (na, nb) = (normalize(a), normalize(b));
    let ta: HashSet<&str> = na.split_whitespace().collect();
    let tb: HashSet<&str> = nb.split_whitespace().collect();
    let union = ta.union(&tb).count();
    if union == 0 {
        return 1.0;
    }
    ta.intersection(&tb).count() as f64 / union as f64
}

/// A corpus of normalized term strings prepared for exhaustive comparison.
pub struct SyntacticMatcher<'a> {
    terms: Vec<&'a OntologyTerm>,
    /// Per term: (normalized string, original string).
    strings: Vec<Vec<(String, String)>>,
}

impl<'a> SyntacticMatcher<'a> {
    pub fn new(corpus: &TermSet<'a>, include_broad: bool) -> Self {
        let mut terms = Vec::new();
        let mut strings = Vec::new();
        for term in corpus.iter() {
            let mut candidates: Vec<(String, String)> = Vec::new();
            let broad = include_broad.then_some(&term.broad_synonyms);
            for s in term
                .labels
                .iter()
                .chain(&term.exact_synonyms)
                .chain(broad.into_iter().flatten())
            {
                let n = normalize(s);
                if !n.is_empty() && !candidates.iter().any(|(c, _)| *c == n) {
                    candidates.push((n, s.clone()));
                }
            }
            if !candidates.is_empty() {
                terms.push(term);
                strings.push(candidates);
            }
        }
        SyntacticMatcher { terms, strings }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Top `top_n` terms by their best-scoring string, ties by ascending IRI.
    pub fn best_matches(&self, query: &str, metric: Metric, top_n: usize) -> Vec<Candidate<'a>> {
        let query = normalize(query);
        let mut scored: Vec<(f64, usize, usize)> = self
            .strings
            .iter()
            .enumerate()
            .map(|(t, candidates)| {
                let mut best = (f64::NEG_INFINITY, 0);
                for (k, (s, _)) in candidates.iter().enumerate() {
                    let score = metric.similarity(&query, s);
                    if score > best.0 {
                        best = (score, k);
                    }
                }
                (best.0, t, best.1)
            })
            .collect();
        // Terms are held in ascending IRI order, so the index breaks ties.
        scored.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
        scored
            .into_iter()
            .take(top_n)
            .map(|(score, t, k)| Candidate {
                term: self.terms[t],
                score,
                matched_string: self.strings[t][k].1.clone(),
            })
            .collect()
    }

    pub fn best_matches_many(&self, queries: &[&str], metric: Metric, top_n: usize) -> Vec<Vec<Candidate<'a>>> {
        queries
            .par_iter()
            .map(|q| self.best_matches(q, metric, top_n))
            .collect()
    }
}

pub fn best_syntactic_match<'a>(query: &str, corpus: &TermSet<'a>, metric: Metric, top_n: usize) -> Vec<Candidate<'a>> {
    SyntacticMatcher::new(corpus, false).best_matches(query, metric, top_n)
}
