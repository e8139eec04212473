use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ontology::TermTypeFilter;
use crate::similarity::Metric;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Mapper {
    Levenshtein,
    Jaro,
    JaroWinkler,
    Jaccard,
    Indel,
    #[default]
    Tfidf,
    Zooma,
    Bioportal,
}

impl Mapper {
    pub const ALL: [Mapper; 8] = [
        Mapper::Levenshtein,
        Mapper::Jaro,
        Mapper::JaroWinkler,
        Mapper::Jaccard,
        Mapper::Indel,
        Mapper::Tfidf,
        Mapper::Zooma,
        Mapper::Bioportal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mapper::Levenshtein => "levenshtein",
            Mapper::Jaro => "jaro",
            Mapper::JaroWinkler => "jarowinkler",
            Mapper::Jaccard => "jaccard",
            Mapper::Indel => "indel",
            Mapper::Tfidf => "tfidf",
            Mapper::Zooma => "zooma",
            Mapper::Bioportal => "bioportal",
        }
    }

    pub fn metric(self) -> Option<Metric> {
        match self {
            Mapper::Levenshtein => Some(Metric::Levenshtein),
            Mapper::Jaro => Some(Metric::Jaro),
            Mapper::JaroWinkler => Some(Metric::JaroWinkler),
            Mapper::Jaccard => Some(Metric::Jaccard),
            Mapper::Indel => Some(Metric::Indel),
            _ => None,
        }
    }

    pub fn is_remote(self) -> bool {
        matches!(self, Mapper::Zooma | Mapper::Bioportal)
    }
}

impl fmt::Display for Mapper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mapper {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = s.trim().to_ascii_lowercase().replace(['-', '_'], "");
        Mapper::ALL.into_iter().find(|m| m.name() == wanted).ok_or_else(|| {
            let names: Vec<&str> = Mapper::ALL.iter().map(|m| m.name()).collect();
            format!("unknown mapper '{s}' (expected one of {})", names.join(", "))
        })
    }
}

macro_rules! labelled_enum {
    ($name:ident { $($variant:ident => $label:literal),+ $(,)? }) => {
        impl $name {
            pub fn label(self) -> &'static str {
                match self { $($name::$variant => $label),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s.trim() {
                    $(v if v.eq_ignore_ascii_case($label) => Ok($name::$variant),)+
                    other => Err(format!(concat!("invalid ", stringify!($name), " '{}'"), other)),
                }
            }
        }
    };
}

/// How the mapped term relates to the source term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum MappingType {
    #[default]
    Exact,
    Broad,
    Narrow,
}

labelled_enum!(MappingType { Exact => "Exact", Broad => "Broad", Narrow => "Narrow" });

/// Curation state of a mapping row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Approval {
    #[default]
    Unapproved,
    Approved,
    Rejected,
}

labelled_enum!(Approval { Unapproved => "Unapproved", Approved => "Approved", Rejected => "Rejected" });

/// Settings for the remote mappers.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RemoteSettings {
    pub api_key: Option<String>,
    /// Overrides the public service endpoint.
    pub base_url: Option<String>,
    pub batch_size: Option<usize>,
    pub concurrency: Option<usize>,
    pub delay_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingConfig {
    pub mapper: Mapper,
    pub max_mappings: usize,
    pub min_score: f64,
    pub excl_deprecated: bool,
    pub base_iris: Vec<String>,
    pub term_type: TermTypeFilter,
    pub incl_unmapped: bool,
    pub ngram_size: usize,
    pub include_broad_synonyms: bool,
    pub csv_column: Option<String>,
    pub source_terms_ids_column: Option<String>,
    pub separator: char,
    pub use_cache: bool,
    pub save_graphs: bool,
    pub output_file: Option<PathBuf>,
    pub blocklist: Vec<String>,
    pub templates: Vec<String>,
    pub remote: RemoteSettings,
}

impl Default for MappingConfig {
    fn default() -> Self {
        MappingConfig {
            mapper: Mapper::Tfidf,
            max_mappings: 1,
            min_score: 0.3,
            excl_deprecated: false,
            base_iris: Vec::new(),
            term_type: TermTypeFilter::Classes,
            incl_unmapped: false,
            ngram_size: 3,
            include_broad_synonyms: false,
            csv_column: None,
            source_terms_ids_column: None,
            separator: ',',
            use_cache: false,
            save_graphs: false,
            output_file: None,
            blocklist: Vec::new(),
            templates: Vec::new(),
            remote: RemoteSettings::default(),
        }
    }
}

impl MappingConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_mappings == 0 {
            return Err("max_mappings must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.min_score) {
            return Err(format!("min_score {} is outside [0, 1]", self.min_score));
        }
        if self.ngram_size == 0 {
            return Err("ngram_size must be at least 1".into());
        }
        Ok(())
    }

    /// Settings recorded in a mapping table's header, in a fixed order.
    pub fn metadata(&self) -> Vec<(String, String)> {
        let opt = |v: &Option<String>| v.clone().unwrap_or_default();
        vec![
            ("mapper".into(), self.mapper.to_string()),
            ("max_mappings".into(), self.max_mappings.to_string()),
            ("min_score".into(), self.min_score.to_string()),
            ("excl_deprecated".into(), self.excl_deprecated.to_string()),
            ("base_iris".into(), self.base_iris.join(" ")),
            ("term_type".into(), self.term_type.to_string()),
            ("incl_unmapped".into(), self.incl_unmapped.to_string()),
            ("ngram_size".into(), self.ngram_size.to_string()),
            ("include_broad_synonyms".into(), self.include_broad_synonyms.to_string()),
            ("csv_column".into(), opt(&self.csv_column)),
            ("source_terms_ids_column".into(), opt(&self.source_terms_ids_column)),
            ("separator".into(), self.separator.escape_default().to_string()),
            ("use_cache".into(), self.use_cache.to_string()),
            ("blocklist".into(), self.blocklist.len().to_string()),
            ("templates".into(), self.templates.len().to_string()),
        ]
    }
}
