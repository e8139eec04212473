use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ontology::{compact_iri, HierarchyIndex};

/// How a tool mapping T relates to a benchmark mapping H.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Same,
    MoreSpecific,
    MoreGeneral,
    Sibling,
    Unrelated,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::Same,
        Category::MoreSpecific,
        Category::MoreGeneral,
        Category::Sibling,
        Category::Unrelated,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Category::Same => "Same",
            Category::MoreSpecific => "More Specific",
            Category::MoreGeneral => "More General",
            Category::Sibling => "Sibling",
            Category::Unrelated => "Unrelated",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown category '{s}'"))
    }
}

pub const TERM_NOT_FOUND: &str = "term-not-found";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Categorization {
    pub category: Category,
    /// Set when T or H is missing from the hierarchy.
    pub note: Option<String>,
}

/// Categorizes with notes on unresolved identifiers.
pub fn categorize_detailed(tool: &str, benchmark: &str, hierarchy: &HierarchyIndex) -> Categorization {
    let canonical = |id: &str| hierarchy.resolve(id).map(str::to_string);
    let (t, h) = (canonical(tool), canonical(benchmark));
    let same = match (&t, &h) {
        (Some(t), Some(h)) => t == h,
        _ => tool == benchmark || compact_iri(tool) == compact_iri(benchmark),
    };
    let category = |category| Categorization { category, note: None };
    if same {
        return category(Category::Same);
    }
    let (Some(t), Some(h)) = (t, h) else {
        let missing: Vec<&str> = [
            (tool, hierarchy.contains(tool)),
            (benchmark, hierarchy.contains(benchmark)),
        ]
        .into_iter()
        .filter(|(_, found)| !found)
        .map(|(id, _)| id)
        .collect();
        return Categorization {
            category: Category::Unrelated,
            note: Some(format!("{TERM_NOT_FOUND}: {}", missing.join(", "))),
        };
    };
    if hierarchy.is_ancestor(&h, &t) {
        category(Category::MoreSpecific)
    } else if hierarchy.is_ancestor(&t, &h) {
        category(Category::MoreGeneral)
    } else if hierarchy.share_direct_parent(&t, &h) {
        category(Category::Sibling)
    } else {
        category(Category::Unrelated)
    }
}

/// Category of tool term `tool` relative to benchmark term `benchmark`.
pub fn categorize(tool: &str, benchmark: &str, hierarchy: &HierarchyIndex) -> Category {
    categorize_detailed(tool, benchmark, hierarchy).category
}
