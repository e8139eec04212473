//! Source-term normalization, regex rewriting and blocklisting.
//!
//! Regexes use the `regex` crate syntax. Both templates and blocklist
//! patterns are matched case-insensitively against the whole string.

use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

pub const IGNORED_TAG: &str = "ignored";
pub const UNMAPPED_TAG: &str = "unmapped";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PreprocessError {
    #[error("pattern {index} ('{pattern}') does not compile: {message}")]
    InvalidPattern {
        index: usize,
        pattern: String,
        message: String,
    },
    #[error("template {index} ('{pattern}') must have exactly one capture group, found {groups}")]
    CaptureGroups {
        index: usize,
        pattern: String,
        groups: usize,
    },
}

/// NFC, lowercase, trimmed, with internal whitespace runs collapsed.
pub fn normalize(text: &str) -> String {
    let lowered: String = text.nfc().collect::<String>().to_lowercase();
    let composed: String = lowered.nfc().collect();
    composed.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// One input string to map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceTerm {
    pub text: String,
    pub normalized: String,
    pub id: Option<String>,
    pub tags: Vec<String>,
}

impl SourceTerm {
    pub fn new(text: impl Into<String>) -> Self {
        let text = text.into();
        SourceTerm {
            normalized: normalize(&text),
            text,
            id: None,
            tags: Vec::new(),
        }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = Some(id.into());
        self
    }

    pub fn with_tags<I, S>(mut self, tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.tags.extend(tags.into_iter().map(Into::into));
        self
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.tags.iter().any(|t| t == tag)
    }

    pub fn is_ignored(&self) -> bool {
        self.has_tag(IGNORED_TAG)
    }

    fn add_tag(&mut self, tag: String) {
        if !self.tags.contains(&tag) {
            self.tags.push(tag);
        }
    }
}

fn compile_all(patterns: &[String]) -> Result<Vec<Regex>, PreprocessError> {
    patterns
        .iter()
        .enumerate()
        .map(|(index, pattern)| {
            RegexBuilder::new(&format!("^(?:{pattern})$"))
                .case_insensitive(true)
                .build()
                .map_err(|e| PreprocessError::InvalidPattern {
                    index,
                    pattern: pattern.clone(),
                    message: e.to_string(),
                })
        })
        .collect()
}

/// Compiled rewrite templates; the first full match wins.
#[derive(Debug, Clone)]
pub struct RegexTemplates {
    patterns: Vec<Regex>,
}

impl RegexTemplates {
    pub fn compile(patterns: &[String]) -> Result<Self, PreprocessError> {
        let compiled = compile_all(patterns)?;
        for (index, (re, pattern)) in compiled.iter().zip(patterns).enumerate() {
            // The wrapping group is non-capturing; slot 0 is the whole match.
            let groups = re.captures_len() - 1;
            if groups != 1 {
                return Err(PreprocessError::CaptureGroups {
                    index,
                    pattern: pattern.clone(),
                    groups,
                });
            }
        }
        Ok(RegexTemplates { patterns: compiled })
    }

    pub fn apply(&self, terms: Vec<SourceTerm>) -> Vec<SourceTerm> {
        terms.into_iter().map(|t| self.apply_one(t)).collect()
    }

    fn apply_one(&self, mut term: SourceTerm) -> SourceTerm {
        let subject = term.text.trim().to_string();
        for (index, re) in self.patterns.iter().enumerate() {
            if let Some(captures) = re.captures(&subject) {
                let replacement = captures.get(1).map(|m| m.as_str()).unwrap_or("");
                term.text = replacement.to_string();
                term.normalized = normalize(replacement);
                term.add_tag(format!("rewritten:{index}"));
                break;
            }
        }
        term
    }
}

/// Compiled blocklist; matching terms are tagged [`IGNORED_TAG`].
#[derive(Debug, Clone)]
pub struct Blocklist {
    patterns: Vec<Regex>,
}

impl Blocklist {
    pub fn compile(patterns: &[String]) -> Result<Self, PreprocessError> {
        Ok(Blocklist {
            patterns: compile_all(patterns)?,
        })
    }

    pub fn is_blocked(&self, term: &SourceTerm) -> bool {
        self.patterns
            .iter()
            .any(|re| re.is_match(&term.normalized) || re.is_match(term.text.trim()))
    }

    pub fn apply(&self, terms: Vec<SourceTerm>) -> Vec<SourceTerm> {
        terms
            .into_iter()
            .map(|mut t| {
                if self.is_blocked(&t) {
                    t.add_tag(IGNORED_TAG.to_string());
                }
                t
            })
            .collect()
    }
}

pub fn apply_regex_templates(terms: Vec<SourceTerm>, patterns: &[String]) -> Result<Vec<SourceTerm>, PreprocessError> {
    Ok(RegexTemplates::compile(patterns)?.apply(terms))
}

pub fn apply_blocklist(terms: Vec<SourceTerm>, blocklist: &[String]) -> Result<Vec<SourceTerm>, PreprocessError> {
    Ok(Blocklist::compile(blocklist)?.apply(terms))
}

/// Reads a pattern file: one regex per line, blank lines and `#` comments
/// skipped.
pub fn parse_pattern_file(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(str::to_string)
        .collect()
}
