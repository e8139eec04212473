//! Acceptance suite. Runs each criterion in turn and prints one
//! `PASS`/`FAIL`/`SKIP` line per criterion; exits non-zero on any failure.

mod oracles;

use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet};
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ontomap::cache::CacheStore;
use ontomap::engine::{
    map_terms_with_ontology, mapping_table_bytes, parse_mapping_table, Approval, EngineError, MappedTerm, Mapper,
    Mapping, MappingConfig, MappingTable, MappingType,
};
use ontomap::evaluation::{categorize, compare_sets, parse_sssom, Category};
use ontomap::ontology::{
    build_hierarchy, load_ontology, parse_obograph, LoadOptions, Ontology, OntologyTerm, TermFilter, TermSet, TermType,
    TermTypeFilter,
};
use ontomap::preprocess::{normalize, SourceTerm, UNMAPPED_TAG};
use ontomap::similarity::Metric;
use ontomap::tfidf::{tfidf_topn, DocOrigin, Document, TfidfIndex, TfidfMatcher};

type Outcome = Result<String, String>;

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn ensure(cond: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(message())
    }
}

fn within(elapsed: Duration, limit: Duration, detail: String) -> Outcome {
    ensure(elapsed < limit, || {
        format!("{detail}; took {elapsed:.2?}, limit {limit:?}")
    })?;
    Ok(format!("{detail}, {elapsed:.2?}"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn fixture() -> Ontology {
    load_ontology(data("mini_efo.json").to_str().unwrap(), &LoadOptions::default()).unwrap()
}

// ---------------------------------------------------------------- metrics

const ALPHABET: &[char] = &[
    'a', 'b', 'c', 'd', 'e', 'A', 'B', ' ', ' ', 'é', 'ß', 'Ω', 'ω', '中', '-',
];

fn random_string(rng: &mut ChaCha8Rng, max: usize) -> String {
    let len = rng.random_range(0..=max);
    (0..len).map(|_| *ALPHABET.choose(rng).unwrap()).collect()
}

fn mutate(rng: &mut ChaCha8Rng, s: &str, max: usize) -> String {
    let mut chars: Vec<char> = s.chars().collect();
    for _ in 0..rng.random_range(0..4) {
        match rng.random_range(0..3) {
            0 if chars.len() < max => chars.insert(rng.random_range(0..=chars.len()), *ALPHABET.choose(rng).unwrap()),
            1 if !chars.is_empty() => {
                chars.remove(rng.random_range(0..chars.len()));
            }
            _ if !chars.is_empty() => {
                let i = rng.random_range(0..chars.len());
                chars[i] = *ALPHABET.choose(rng).unwrap();
            }
            _ => {}
        }
    }
    chars.into_iter().collect()
}

type Similarity = fn(&str, &str) -> f64;

fn metric_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d657472);
    let oracles: [(Metric, Similarity); 5] = [
        (Metric::Levenshtein, oracles::levenshtein),
        (Metric::Indel, oracles::indel),
        (Metric::Jaro, oracles::jaro),
        (Metric::JaroWinkler, oracles::jaro_winkler),
        (Metric::Jaccard, oracles::jaccard),
    ];
    let mut worst = 0.0f64;
    for i in 0..200 {
        let a = random_string(&mut rng, 40);
        let b = if i % 2 == 0 {
            mutate(&mut rng, &a, 40)
        } else {
            random_string(&mut rng, 40)
        };
        for (metric, oracle) in oracles {
            for (x, y) in [(&a, &b), (&b, &a)] {
                let (got, want) = (metric.similarity(x, y), oracle(x, y));
                worst = worst.max((got - want).abs());
                ensure((got - want).abs() <= 1e-12, || {
                    format!("{metric}({x:?}, {y:?}) = {got}, oracle {want}")
                })?;
            }
        }
    }
    within(
        start.elapsed(),
        Duration::from_secs(5),
        format!("200 pairs x 5 metrics, max error {worst:.1e}"),
    )
}

// ---------------------------------------------------------------- tf-idf

const SYLLABLES: &[&str] = &[
    "ca", "di", "ne", "ro", "pa", "ti", "lu", "mo", "se", "ga", "he", "ar", "it", "is", "on", "ex",
];

fn word(rng: &mut ChaCha8Rng, syllables: usize) -> String {
    (0..syllables).map(|_| *SYLLABLES.choose(rng).unwrap()).collect()
}

fn phrase(rng: &mut ChaCha8Rng, words: &[String]) -> String {
    let n = rng.random_range(1..=3);
    (0..n)
        .map(|_| words.choose(rng).unwrap().as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

fn documents(texts: &[String]) -> Vec<Document> {
    texts
        .iter()
        .enumerate()
        .map(|(i, t)| Document {
            text: t.clone(),
            original: t.clone(),
            owner: format!("T{i}"),
            owner_index: i,
            origin: DocOrigin::Label,
        })
        .collect()
}

fn sparse_dense_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x73706172);
    let mut compared = 0usize;
    for corpus in 0..20 {
        let n = 2 + corpus % 3;
        let size = rng.random_range(1..=500);
        let words: Vec<String> = (0..rng.random_range(5..60))
            .map(|_| {
                let s = rng.random_range(1..4);
                word(&mut rng, s)
            })
            .collect();
        let texts: Vec<String> = (0..size).map(|_| phrase(&mut rng, &words)).collect();
        let index = TfidfIndex::from_documents(documents(&texts), n).map_err(|e| e.to_string())?;
        let dense = oracles::DenseTfidf::new(&texts, n);

        let queries: Vec<String> = (0..50)
            .map(|q| match q % 5 {
                0 => texts.choose(&mut rng).unwrap().clone(),
                1 | 2 => {
                    let t = texts.choose(&mut rng).unwrap().clone();
                    mutate(&mut rng, &t, 60)
                }
                3 => phrase(&mut rng, &words),
                _ => random_string(&mut rng, 12),
            })
            .collect();
        let top_n = rng.random_range(1..=10);
        let min_score = *[0.0, 0.0, 0.1, 0.3].choose(&mut rng).unwrap();
        let hits = tfidf_topn(&index, &queries, top_n, min_score);

        for (query, got) in queries.iter().zip(&hits) {
            let want = dense.top(query, top_n, min_score);
            let all = dense.scores(query);
            let context = || format!("corpus {corpus} (n={n}, {size} docs), query {query:?}");
            ensure(got.len() == want.len(), || {
                format!("{}: {} hits, dense oracle {}", context(), got.len(), want.len())
            })?;
            for (k, (g, &(row, score))) in got.iter().zip(&want).enumerate() {
                ensure((g.score - score).abs() <= 1e-9, || {
                    format!("{}: position {k} score {} vs {score}", context(), g.score)
                })?;
                // Rows may differ only where the dense scores are tied to 1e-12.
                ensure(g.row == row || (all[g.row] - score).abs() < 1e-12, || {
                    format!("{}: position {k} row {} vs {row}", context(), g.row)
                })?;
            }
            compared += 1;
        }
    }
    within(
        start.elapsed(),
        Duration::from_secs(30),
        format!("20 corpora, {compared} queries"),
    )
}

const WORDS: &[&str] = &[
    "heart", "disease", "acute", "chronic", "asthma", "renal", "failure", "type", "cancer", "lung", "liver",
    "syndrome", "panic", "attack", "kidney", "stone", "blood", "pressure", "high", "low",
];

const BASES: &[&str] = &[
    "http://www.ebi.ac.uk/efo/EFO_",
    "http://purl.obolibrary.org/obo/MONDO_",
    "http://purl.obolibrary.org/obo/HP_",
];

fn random_label(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(1..=3);
    let mut words: Vec<String> = (0..n).map(|_| WORDS.choose(rng).unwrap().to_string()).collect();
    if rng.random_bool(0.2) {
        words[0] = words[0].to_uppercase();
    }
    words.join(" ")
}

/// A random ontology with labels, synonyms, mixed prefixes, deprecations and
/// a few properties. Parents always point to earlier terms.
fn random_ontology(seed: u64, size: usize) -> Ontology {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let iris: Vec<String> = (0..size)
        .map(|i| format!("{}{:07}", BASES.choose(&mut rng).unwrap(), i))
        .collect();
    let terms = iris.iter().enumerate().map(|(i, iri)| {
        let term_type = if rng.random_bool(0.15) {
            TermType::Property
        } else {
            TermType::Class
        };
        let mut term = OntologyTerm::new(iri.clone(), term_type).deprecated(rng.random_bool(0.2));
        if rng.random_bool(0.95) {
            term = term.with_label(random_label(&mut rng));
        }
        for _ in 0..rng.random_range(0..3) {
            term = term.with_synonym(random_label(&mut rng));
        }
        if rng.random_bool(0.3) {
            term.broad_synonyms.push(random_label(&mut rng));
        }
        if i > 0 && rng.random_bool(0.7) {
            term = term.with_parent(iris[rng.random_range(0..i)].clone());
        }
        term
    });
    Ontology::from_terms(terms.collect::<Vec<_>>())
}

fn exact_match_contract() -> Outcome {
    let start = Instant::now();
    let mut runner = runner(100);
    let strategy = (any::<u64>(), 1usize..60, 2usize..5, 0usize..1000, 1usize..4);
    runner
        .run(&strategy, |(seed, size, n, pick, max_mappings)| {
            let ontology = random_ontology(seed, size);
            let corpus = TermSet::all(&ontology);
            let Ok(matcher) = TfidfMatcher::new(&corpus, n, false) else {
                prop_assert!(corpus
                    .iter()
                    .all(|t| t.labels.is_empty() && t.exact_synonyms.is_empty()));
                return Ok(());
            };
            let docs = matcher.index().documents();
            let doc = &docs[pick % docs.len()];
            let results = matcher.match_normalized(&[doc.text.as_str()], max_mappings, 0.0);
            let top = results[0].first();
            prop_assert!(top.is_some(), "no candidates for {:?}", doc.text);
            let top = top.unwrap();
            let owns = top
                .term
                .labels
                .iter()
                .chain(&top.term.exact_synonyms)
                .any(|s| normalize(s) == doc.text);
            prop_assert!(
                owns,
                "rank 1 for {:?} is {} ({:?})",
                doc.text,
                top.term.iri,
                top.matched_string
            );
            prop_assert!(
                (top.score - 1.0).abs() <= 1e-9,
                "score {} for {:?}",
                top.score,
                doc.text
            );
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("100 cases, {:.2?}", start.elapsed()))
}

fn throughput() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x7a697066);
    let vocabulary: Vec<String> = (0..5000)
        .map(|_| {
            let s = rng.random_range(2..5);
            word(&mut rng, s)
        })
        .collect();
    let zipf = WeightedIndex::new((1..=vocabulary.len()).map(|k| 1.0 / (k as f64).powf(1.07))).unwrap();
    let draw = |rng: &mut ChaCha8Rng| {
        let n = rng.random_range(1..=5);
        (0..n)
            .map(|_| vocabulary[zipf.sample(rng)].as_str())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let texts: Vec<String> = (0..50_000).map(|_| draw(&mut rng)).collect();
    let queries: Vec<String> = (0..10_000)
        .map(|i| {
            if i % 10 < 7 {
                let t = texts.choose(&mut rng).unwrap().clone();
                mutate(&mut rng, &t, 80)
            } else {
                draw(&mut rng)
            }
        })
        .collect();
    let generated = start.elapsed();

    let timer = Instant::now();
    let index = TfidfIndex::from_documents(documents(&texts), 3).map_err(|e| e.to_string())?;
    let built = timer.elapsed();
    let hits = tfidf_topn(&index, &queries, 3, 0.0);
    let elapsed = timer.elapsed();
    ensure(hits.len() == queries.len() && hits.iter().all(|h| h.len() <= 3), || {
        "unexpected result shape".into()
    })?;
    ensure(hits.iter().filter(|h| !h.is_empty()).count() > 9_000, || {
        "too few queries returned candidates".into()
    })?;
    within(
        elapsed,
        Duration::from_secs(60),
        format!(
            "50000 docs, 10000 queries on {} thread(s), index {built:.2?}, data generation {generated:.2?} excluded",
            rayon::current_num_threads()
        ),
    )
}

// ---------------------------------------------------------------- engine

#[derive(Debug, Clone)]
struct Scenario {
    seed: u64,
    size: usize,
    mapper: Mapper,
    max_mappings: usize,
    min_score: f64,
    excl_deprecated: bool,
    base_iris: Vec<String>,
    term_type: TermTypeFilter,
    include_broad: bool,
    ngram_size: usize,
}

fn scenario() -> impl Strategy<Value = Scenario> {
    let local = prop::sample::select(Mapper::ALL.into_iter().filter(|m| !m.is_remote()).collect::<Vec<_>>());
    let term_type = prop::sample::select(vec![
        TermTypeFilter::Classes,
        TermTypeFilter::Properties,
        TermTypeFilter::Both,
    ]);
    (
        (any::<u64>(), 0usize..60, local, 1usize..5, 0u32..=95),
        (
            any::<bool>(),
            prop::sample::subsequence(BASES.to_vec(), 0..=2),
            term_type,
            any::<bool>(),
            2usize..5,
        ),
    )
        .prop_map(
            |(
                (seed, size, mapper, max_mappings, min),
                (excl_deprecated, bases, term_type, include_broad, ngram_size),
            )| {
                Scenario {
                    seed,
                    size,
                    mapper,
                    max_mappings,
                    min_score: f64::from(min) / 100.0,
                    excl_deprecated,
                    base_iris: bases.into_iter().map(String::from).collect(),
                    term_type,
                    include_broad,
                    ngram_size,
                }
            },
        )
}

impl Scenario {
    fn config(&self, incl_unmapped: bool) -> MappingConfig {
        MappingConfig {
            mapper: self.mapper,
            max_mappings: self.max_mappings,
            min_score: self.min_score,
            excl_deprecated: self.excl_deprecated,
            base_iris: self.base_iris.clone(),
            term_type: self.term_type,
            incl_unmapped,
            ngram_size: self.ngram_size,
            include_broad_synonyms: self.include_broad,
            ..MappingConfig::default()
        }
    }

    fn sources(&self) -> Vec<SourceTerm> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x5eed);
        (0..rng.random_range(1..15))
            .map(|i| {
                let text = if rng.random_bool(0.15) {
                    "zzqx vvwk".to_string()
                } else {
                    random_label(&mut rng)
                };
                SourceTerm::new(text).with_id(format!("S{i}"))
            })
            .collect()
    }
}

fn without_unmapped_rows(table: &MappingTable) -> Vec<Mapping> {
    table
        .rows
        .iter()
        .filter(|r| !(r.target.is_none() && r.source.has_tag(UNMAPPED_TAG)))
        .cloned()
        .collect()
}

fn check_laws(s: &Scenario, ontology: &Ontology, table: &MappingTable, sources: usize) -> Result<(), String> {
    let mut per_source: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for row in &table.rows {
        let id = row.source.id.as_deref().unwrap_or("");
        let Some(t) = &row.target else {
            ensure(row.source.has_tag(UNMAPPED_TAG), || {
                format!("untagged empty row for {id}")
            })?;
            continue;
        };
        ensure(t.score >= s.min_score, || {
            format!("{id}: score {} below {}", t.score, s.min_score)
        })?;
        let term = ontology
            .get(&t.iri)
            .ok_or_else(|| format!("{id}: unknown IRI {}", t.iri))?;
        ensure(!(s.excl_deprecated && term.deprecated), || {
            format!("{id}: deprecated {}", t.iri)
        })?;
        ensure(
            s.base_iris.is_empty() || s.base_iris.iter().any(|b| t.iri.starts_with(b.as_str())),
            || format!("{id}: {} outside base IRIs", t.iri),
        )?;
        ensure(s.term_type.accepts(term.term_type), || {
            format!("{id}: {} has type {}", t.iri, term.term_type)
        })?;
        per_source.entry(id).or_default().push(t.rank);
    }
    for (id, ranks) in &per_source {
        ensure(ranks.len() <= s.max_mappings, || format!("{id}: {} rows", ranks.len()))?;
        ensure(ranks.iter().copied().eq(1..=ranks.len()), || {
            format!("{id}: ranks {ranks:?}")
        })?;
    }
    ensure(per_source.len() + table.unmapped.len() == sources, || {
        format!(
            "{} mapped + {} unmapped != {sources}",
            per_source.len(),
            table.unmapped.len()
        )
    })
}

fn filter_laws() -> Outcome {
    let start = Instant::now();
    let mut runner = runner(150);
    let empty_corpora = Cell::new(0);
    let mapped_rows = Cell::new(0);
    runner
        .run(&scenario(), |s| {
            let ontology = random_ontology(s.seed, s.size);
            let sources = s.sources();
            let plain = map_terms_with_ontology(sources.clone(), &ontology, &s.config(false));
            let full = map_terms_with_ontology(sources.clone(), &ontology, &s.config(true));
            let (plain, full) = match (plain, full) {
                (Ok(p), Ok(f)) => (p, f),
                (Err(EngineError::Index(_)), Err(EngineError::Index(_))) => {
                    let filter = TermFilter {
                        base_iris: s.base_iris.clone(),
                        excl_deprecated: s.excl_deprecated,
                        term_type: s.term_type,
                    };
                    let corpus = TermSet::all(&ontology).filter(&filter);
                    prop_assert!(corpus.iter().all(|t| t.labels.is_empty()
                        && t.exact_synonyms.is_empty()
                        && (!s.include_broad || t.broad_synonyms.is_empty())));
                    empty_corpora.set(empty_corpora.get() + 1);
                    return Ok(());
                }
                (p, f) => {
                    return Err(TestCaseError::fail(format!(
                        "unexpected results {:?} / {:?}",
                        p.err(),
                        f.err()
                    )))
                }
            };
            for table in [&plain, &full] {
                check_laws(&s, &ontology, table, sources.len()).map_err(TestCaseError::fail)?;
            }
            prop_assert!(
                plain.rows.iter().all(|r| r.target.is_some()),
                "unmapped row without incl_unmapped"
            );
            mapped_rows.set(mapped_rows.get() + plain.rows.len());
            prop_assert_eq!(without_unmapped_rows(&full), plain.rows.clone());
            prop_assert_eq!(&full.unmapped, &plain.unmapped);
            prop_assert_eq!(
                full.rows.len() - plain.rows.len(),
                full.unmapped.len(),
                "incl_unmapped must add exactly one row per unmapped term"
            );
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!(
        "150 random configs, {} mapped rows, {} with an unlabelled corpus, {:.2?}",
        mapped_rows.get(),
        empty_corpora.get(),
        start.elapsed()
    ))
}

// ---------------------------------------------------------------- evaluation

fn iri(i: usize) -> String {
    format!("http://example.org/obo/X_{i}")
}

/// An ontology over nodes `0..n` with child→parent edges.
fn hierarchy_fixture(n: usize, edges: &[(usize, usize)]) -> (Ontology, oracles::HierarchyOracle) {
    let nodes: Vec<String> = (0..n).map(iri).collect();
    let named: Vec<(String, String)> = edges.iter().map(|&(c, p)| (iri(c), iri(p))).collect();
    let terms = (0..n).map(|i| {
        let mut t = OntologyTerm::new(iri(i), TermType::Class).with_label(format!("node {i}"));
        for &(c, p) in edges {
            if c == i {
                t = t.with_parent(iri(p));
            }
        }
        t
    });
    (
        Ontology::from_terms(terms.collect::<Vec<_>>()),
        oracles::HierarchyOracle::new(&nodes, &named),
    )
}

type Edge = (usize, usize);

fn categorizer() -> Outcome {
    let start = Instant::now();
    let mut shapes: Vec<(String, usize, Vec<Edge>)> = vec![
        ("chain".into(), 8, (1..8).map(|i| (i, i - 1)).collect()),
        ("diamond".into(), 4, vec![(1, 0), (2, 0), (3, 1), (3, 2)]),
        (
            "stacked diamonds".into(),
            7,
            vec![(1, 0), (2, 0), (3, 1), (3, 2), (4, 3), (5, 3), (6, 4), (6, 5)],
        ),
        ("sibling star".into(), 9, (1..9).map(|i| (i, 0)).collect()),
        (
            "disjoint forest".into(),
            10,
            vec![(1, 0), (2, 0), (3, 1), (5, 4), (6, 5), (7, 5), (9, 8)],
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0x64616773);
    for k in 0..20 {
        let n = rng.random_range(2..25);
        let edges = (1..n)
            .flat_map(|c| (0..c).map(move |p| (c, p)))
            .filter(|_| rng.random_bool(0.15))
            .collect();
        shapes.push((format!("random DAG {k}"), n, edges));
    }

    let mut pairs = 0;
    let mut seen: BTreeSet<&'static str> = BTreeSet::new();
    for (name, n, edges) in &shapes {
        let (ontology, oracle) = hierarchy_fixture(*n, edges);
        let hierarchy = build_hierarchy(&ontology);
        for t in 0..*n {
            for h in 0..*n {
                let got = categorize(&iri(t), &iri(h), &hierarchy);
                let want = oracle.category(&iri(t), &iri(h));
                ensure(got.label() == want, || {
                    format!("{name}: ({t}, {h}) gave {}, oracle {want}", got.label())
                })?;
                let back = categorize(&iri(h), &iri(t), &hierarchy);
                let mirrored = match got {
                    Category::MoreSpecific => Category::MoreGeneral,
                    Category::MoreGeneral => Category::MoreSpecific,
                    other => other,
                };
                ensure(back == mirrored, || {
                    format!("{name}: ({t}, {h}) is {got:?} but reverse is {back:?}")
                })?;
                seen.insert(want);
                pairs += 1;
            }
        }
    }
    ensure(seen.len() == 5, || format!("fixtures only exercise {seen:?}"))?;

    let ontology = fixture();
    let hierarchy = build_hierarchy(&ontology);
    let benchmark = parse_sssom(&std::fs::read(data("five_pairs.sssom.tsv")).unwrap()).map_err(|e| e.to_string())?;
    let tool = parse_mapping_table(&std::fs::read(data("five_pairs_tool.csv")).unwrap()).map_err(|e| e.to_string())?;
    let summary = compare_sets(&tool, &benchmark.mappings, &hierarchy, 0).summary;
    let counts: Vec<usize> = Category::ALL.iter().map(|&c| summary.count(c)).collect();
    ensure(counts == [1, 1, 1, 1, 1] && summary.unmapped == 0, || {
        format!("five-pair fixture counts {counts:?}, unmapped {}", summary.unmapped)
    })?;
    Ok(format!(
        "{} hierarchies, {pairs} ordered pairs, five-pair fixture (1,1,1,1,1), {:.2?}",
        shapes.len(),
        start.elapsed()
    ))
}

// ---------------------------------------------------------------- round trips

fn mapping_strategy() -> impl Strategy<Value = Mapping> {
    let text = "[a-zA-Z0-9 ,;\"'|\\\\#é\n]{1,16}";
    let target = (
        "[a-z:/_.0-9]{1,24}",
        "[A-Z]{1,5}:[0-9]{1,7}",
        text,
        0u32..=1000,
        1usize..6,
        text,
    )
        .prop_map(|(iri, curie, label, score, rank, matched_string)| MappedTerm {
            iri,
            curie,
            label,
            score: f64::from(score) / 1000.0,
            rank,
            matched_string,
        });
    let tags = prop::collection::vec(prop_oneof![Just(UNMAPPED_TAG.to_string()), "[a-z|\\\\ :]{1,8}"], 0..3);
    (
        text,
        prop::option::of("[A-Za-z0-9:_]{1,10}"),
        tags,
        prop::option::of(target),
        prop::sample::select(Mapper::ALL.to_vec()),
        prop::sample::select(vec![MappingType::Exact, MappingType::Broad, MappingType::Narrow]),
        prop::sample::select(vec![Approval::Unapproved, Approval::Approved, Approval::Rejected]),
    )
        .prop_map(|(text, id, tags, target, mapper, mapping_type, approval)| {
            let mut source = SourceTerm::new(text).with_tags(tags);
            if let Some(id) = id {
                source = source.with_id(id);
            }
            Mapping {
                source,
                target,
                mapper,
                mapping_type,
                approval,
            }
        })
}

fn table_strategy() -> impl Strategy<Value = MappingTable> {
    (
        prop::collection::vec(("[a-z_]{1,12}", "[a-z :\\\\\n\r#,\"é]{0,16}"), 0..6),
        prop::collection::vec(mapping_strategy(), 0..12),
    )
        .prop_map(|(metadata, rows)| {
            let unmapped = rows
                .iter()
                .filter(|r| r.target.is_none() && r.source.has_tag(UNMAPPED_TAG))
                .map(|r| r.source.clone())
                .collect();
            MappingTable {
                metadata,
                rows,
                unmapped,
                failures: Vec::new(),
            }
        })
}

fn ontology_strategy() -> impl Strategy<Value = Ontology> {
    let text = "[a-z|\\\\ ,\"'\té]{1,12}";
    let term = (
        0u32..40,
        prop::collection::vec(text, 0..3),
        prop::collection::vec(text, 0..3),
        prop::collection::vec(text, 0..2),
        prop::collection::vec(text, 0..2),
        prop::collection::btree_set(0u32..50, 0..3),
        prop::collection::btree_set(0u32..50, 0..2),
        (any::<bool>(), any::<bool>()),
    )
        .prop_map(
            |(id, labels, exact, broad, defs, parents, instances, (deprecated, property))| {
                let mut t = OntologyTerm::new(
                    format!("http://example.org/obo/EX_{id}"),
                    if property { TermType::Property } else { TermType::Class },
                )
                .deprecated(deprecated);
                t.labels = labels;
                t.exact_synonyms = exact;
                t.broad_synonyms = broad;
                t.definitions = defs;
                t.parents = parents
                    .into_iter()
                    .map(|p| format!("http://example.org/obo/EX_{p}"))
                    .collect();
                t.instances = instances
                    .into_iter()
                    .map(|p| format!("http://example.org/obo/IND_{p}"))
                    .collect();
                t
            },
        );
    (prop::collection::vec(term, 1..15), prop::option::of("[0-9.]{1,8}")).prop_map(|(terms, version)| {
        let mut o = Ontology::from_terms(terms);
        o.version_info = version;
        o
    })
}

fn cache_round_trip(store: &CacheStore, ontology: &Ontology, acronym: &str) -> Result<(), String> {
    let locator = format!("/data/{acronym}.json");
    store.store(ontology, &locator, acronym).map_err(|e| e.to_string())?;
    let loaded = store.load_cached(acronym).map_err(|e| e.to_string())?;
    let mut expected = ontology.clone();
    expected.acronym = acronym.to_string();
    expected.source_locator = locator;
    ensure(loaded == expected, || {
        format!("cached '{acronym}' differs after reload")
    })
}

fn round_trips() -> Outcome {
    let start = Instant::now();
    runner(200)
        .run(&table_strategy(), |table| {
            let bytes = mapping_table_bytes(&table).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let back = parse_mapping_table(&bytes).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(back, table);
            Ok(())
        })
        .map_err(|e| format!("mapping table: {e}"))?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let store = CacheStore::new(dir.path());
    let bytes = std::fs::read(data("mini_efo.json")).map_err(|e| e.to_string())?;
    let efo = parse_obograph(&bytes).map_err(|e| e.to_string())?;
    cache_round_trip(&store, &efo, "EFO").map_err(|e| format!("fixture: {e}"))?;
    let case = Cell::new(0);
    runner(50)
        .run(&ontology_strategy(), |ontology| {
            case.set(case.get() + 1);
            cache_round_trip(&store, &ontology, &format!("R{}", case.get() % 4)).map_err(TestCaseError::fail)
        })
        .map_err(|e| format!("ontology cache: {e}"))?;
    Ok(format!(
        "200 mapping tables, fixture + 50 random ontologies through the cache, {:.2?}",
        start.elapsed()
    ))
}

// ---------------------------------------------------------------- reproduction

const EFO_ENV: &str = "ONTOMAP_EFO";
const BENCHMARK_ENV: &str = "ONTOMAP_BENCHMARK_DIR";

/// (file name, published Same count, published Same percentage)
const BENCHMARKS: [(&str, usize, f64); 3] = [
    ("ukb-efo.sssom.tsv", 660, 73.0),
    ("biomappings.sssom.tsv", 626, 79.0),
    ("ols.sssom.tsv", 6588, 81.0),
];

fn reproduction() -> Result<Verdict, String> {
    let (Some(efo), Some(dir)) = (std::env::var_os(EFO_ENV), std::env::var_os(BENCHMARK_ENV)) else {
        return Ok(Verdict::Skip(format!(
            "network-optional; set {EFO_ENV} and {BENCHMARK_ENV} to run"
        )));
    };
    let start = Instant::now();
    let ontology = load_ontology(&efo.to_string_lossy(), &LoadOptions::default()).map_err(|e| e.to_string())?;
    let hierarchy = build_hierarchy(&ontology);
    let config = MappingConfig::default();
    let mut notes = Vec::new();
    let mut failed = Vec::new();

    let sample = ["heart disease", "alzheimers", "panic attack"]
        .map(SourceTerm::new)
        .to_vec();
    let table = map_terms_with_ontology(sample, &ontology, &config).map_err(|e| e.to_string())?;
    let top: Vec<String> = table
        .rows
        .iter()
        .filter_map(|r| r.target.as_ref().map(|t| format!("{} ({:.3})", t.curie, t.score)))
        .collect();
    let expected = ["EFO:0003777", "MONDO:0004975", "EFO:0004262"];
    if top.len() != 3 || top.iter().zip(expected).any(|(got, want)| !got.starts_with(want)) {
        failed.push(format!("sample terms gave {top:?}"));
    }
    notes.push(format!("sample {}", top.join(", ")));

    for (file, count, percent) in BENCHMARKS {
        let path = Path::new(&dir).join(file);
        let bytes = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        let benchmark = parse_sssom(&bytes).map_err(|e| e.to_string())?;
        let sources = benchmark
            .mappings
            .iter()
            .map(|m| {
                let s = SourceTerm::new(m.input_text.clone());
                match &m.source_id {
                    Some(id) => s.with_id(id.clone()),
                    None => s,
                }
            })
            .collect();
        let table = map_terms_with_ontology(sources, &ontology, &config).map_err(|e| e.to_string())?;
        let summary = compare_sets(&table, &benchmark.mappings, &hierarchy, 0).summary;
        let same = summary.percentage(Category::Same);
        notes.push(format!(
            "{file} Same {} ({same:.1}%, published {count} ({percent}%))",
            summary.count(Category::Same)
        ));
        if (same - percent).abs() > 3.0 {
            failed.push(format!("{file} Same {same:.1}% vs {percent}%"));
        }
    }
    let detail = format!("{}; {:.2?}", notes.join("; "), start.elapsed());
    Ok(if failed.is_empty() {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(format!("{}; {detail}", failed.join("; ")))
    })
}

// ---------------------------------------------------------------- driver

fn guarded(f: impl FnOnce() -> Result<Verdict, String>) -> Verdict {
    match panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => v,
        Ok(Err(message)) => Verdict::Fail(message),
        Err(payload) => {
            let message = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Verdict::Fail(format!("panicked: {message}"))
        }
    }
}

fn binding(f: fn() -> Outcome) -> impl FnOnce() -> Result<Verdict, String> {
    move || f().map(Verdict::Pass)
}

type Criterion = dyn FnOnce() -> Result<Verdict, String>;

fn main() {
    let criteria: Vec<(&str, Box<Criterion>)> = vec![
        ("metric oracles", Box::new(binding(metric_oracles))),
        ("sparse/dense equivalence", Box::new(binding(sparse_dense_equivalence))),
        ("exact-match contract", Box::new(binding(exact_match_contract))),
        ("throughput", Box::new(binding(throughput))),
        ("filter laws", Box::new(binding(filter_laws))),
        ("categorizer", Box::new(binding(categorizer))),
        ("round trips", Box::new(binding(round_trips))),
        ("reproduction", Box::new(reproduction)),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let (status, detail) = match guarded(check) {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Skip(d) => ("SKIP", d),
            Verdict::Fail(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!("{status} {name}: {detail}");
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
