//! Reference implementations written directly from the definitions, kept
//! deliberately naive so they share no code with the library.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

pub fn levenshtein(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let substitution = d[i - 1][j - 1] + if a[i - 1] == b[j - 1] { 0 } else { 1 };
            d[i][j] = substitution.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    let longest = a.len().max(b.len());
    if longest == 0 {
        1.0
    } else {
        1.0 - d[a.len()][b.len()] as f64 / longest as f64
    }
}

pub fn indel(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut l = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            l[i][j] = if a[i - 1] == b[j - 1] {
                l[i - 1][j - 1] + 1
            } else {
                l[i - 1][j].max(l[i][j - 1])
            };
        }
    }
    let total = a.len() + b.len();
    if total == 0 {
        1.0
    } else {
        2.0 * l[a.len()][b.len()] as f64 / total as f64
    }
}

/// Jaro similarity; the shorter string (then the smaller one) is scanned first.
pub fn jaro(a: &str, b: &str) -> f64 {
    let (x, y): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
    let (s, t) = if (x.len(), &x) <= (y.len(), &y) { (x, y) } else { (y, x) };
    if s.is_empty() && t.is_empty() {
        return 1.0;
    }
    if s.is_empty() {
        return 0.0;
    }
    let window = (s.len().max(t.len()) / 2).saturating_sub(1) as isize;
    let mut s_flags = vec![false; s.len()];
    let mut t_flags = vec![false; t.len()];
    for i in 0..s.len() {
        for j in 0..t.len() {
            let distance = (i as isize - j as isize).abs();
            if distance <= window && !t_flags[j] && s[i] == t[j] {
                s_flags[i] = true;
                t_flags[j] = true;
                break;
            }
        }
    }
    let s_seq: Vec<char> = (0..s.len()).filter(|&i| s_flags[i]).map(|i| s[i]).collect();
    let t_seq: Vec<char> = (0..t.len()).filter(|&j| t_flags[j]).map(|j| t[j]).collect();
    let m = s_seq.len() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let mismatched = (0..s_seq.len()).filter(|&k| s_seq[k] != t_seq[k]).count() as f64;
    (m / s.len() as f64 + m / t.len() as f64 + (m - mismatched / 2.0) / m) / 3.0
}

pub fn jaro_winkler(a: &str, b: &str) -> f64 {
    let j = jaro(a, b);
    let (x, y): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
    let mut prefix = 0;
    while prefix < 4 && prefix < x.len() && prefix < y.len() && x[prefix] == y[prefix] {
        prefix += 1;
    }
    j + prefix as f64 * 0.1 * (1.0 - j)
}

pub fn jaccard(a: &str, b: &str) -> f64 {
    let lower_a = a.to_lowercase();
    let lower_b = b.to_lowercase();
    let x: BTreeSet<&str> = lower_a.split_whitespace().collect();
    let y: BTreeSet<&str> = lower_b.split_whitespace().collect();
    let union = x.union(&y).count();
    if union == 0 {
        1.0
    } else {
        x.intersection(&y).count() as f64 / union as f64
    }
}

fn grams(text: &str, n: usize) -> Vec<String> {
    let padded: Vec<char> = format!(" {text} ").chars().collect();
    if padded.len() < n {
        return vec![padded.iter().collect()];
    }
    (0..=padded.len() - n)
        .map(|i| padded[i..i + n].iter().collect())
        .collect()
}

/// Dense TF-IDF with full-matrix cosine scoring.
pub struct DenseTfidf {
    columns: BTreeMap<String, usize>,
    idf: Vec<f64>,
    rows: Vec<Vec<f64>>,
    n: usize,
}

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in &mut v {
            *x /= norm;
        }
    }
    v
}

impl DenseTfidf {
    pub fn new(documents: &[String], n: usize) -> Self {
        let mut columns = BTreeMap::new();
        for d in documents {
            for g in grams(d, n) {
                columns.entry(g).or_insert(0);
            }
        }
        for (i, v) in columns.values_mut().enumerate() {
            *v = i;
        }
        let mut df = vec![0usize; columns.len()];
        for d in documents {
            let distinct: BTreeSet<String> = grams(d, n).into_iter().collect();
            for g in distinct {
                df[columns[&g]] += 1;
            }
        }
        let total = documents.len() as f64;
        let idf: Vec<f64> = df
            .iter()
            .map(|&f| ((1.0 + total) / (1.0 + f as f64)).ln() + 1.0)
            .collect();
        let mut dense = DenseTfidf {
            columns,
            idf,
            rows: Vec::new(),
            n,
        };
        dense.rows = documents.iter().map(|d| dense.vector(d)).collect();
        dense
    }

    pub fn vector(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.columns.len()];
        for g in grams(text, self.n) {
            if let Some(&c) = self.columns.get(&g) {
                v[c] += 1.0;
            }
        }
        for (c, x) in v.iter_mut().enumerate() {
            *x *= self.idf[c];
        }
        unit(v)
    }

    pub fn scores(&self, query: &str) -> Vec<f64> {
        let q = self.vector(query);
        self.rows
            .iter()
            .map(|r| r.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }

    /// Rows with positive score at or above `min_score`, best first, ties by row.
    pub fn top(&self, query: &str, top_n: usize, min_score: f64) -> Vec<(usize, f64)> {
        let mut hits: Vec<(usize, f64)> = self
            .scores(query)
            .into_iter()
            .enumerate()
            .map(|(r, s)| (r, s.min(1.0)))
            .filter(|&(_, s)| s > 0.0 && s >= min_score)
            .collect();
        hits.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        hits.truncate(top_n);
        hits
    }
}

/// Categorization from raw child→parent edges.
pub struct HierarchyOracle {
    parents: HashMap<String, BTreeSet<String>>,
}

impl HierarchyOracle {
    pub fn new(nodes: &[String], edges: &[(String, String)]) -> Self {
        let mut parents: HashMap<String, BTreeSet<String>> =
            nodes.iter().map(|n| (n.clone(), BTreeSet::new())).collect();
        for (c, p) in edges {
            parents.get_mut(c).unwrap().insert(p.clone());
        }
        HierarchyOracle { parents }
    }

    pub fn ancestors(&self, node: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<String> = self.parents[node].iter().cloned().collect();
        while let Some(p) = queue.pop_front() {
            if seen.insert(p.clone()) {
                queue.extend(self.parents[&p].iter().cloned());
            }
        }
        seen
    }

    pub fn category(&self, t: &str, h: &str) -> &'static str {
        if t == h {
            "Same"
        } else if self.ancestors(t).contains(h) {
            "More Specific"
        } else if self.ancestors(h).contains(t) {
            "More General"
        } else if !self.parents[t].is_disjoint(&self.parents[h]) {
            "Sibling"
        } else {
            "Unrelated"
        }
    }
}
