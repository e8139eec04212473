use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ontomap::cache::CACHE_DIR_ENV;
use ontomap::engine::{Mapper, MappingConfig};
use ontomap::ontology::TermTypeFilter;
use ontomap::remote::BIOPORTAL_API_KEY_ENV;

#[derive(Debug, Parser)]
#[command(
    name = "ontomap",
    version,
    about = "Map free-text entity descriptions to ontology terms"
)]
pub struct Cli {
    /// Directory holding cached ontologies.
    #[arg(long, global = true, env = CACHE_DIR_ENV, value_name = "DIR")]
    pub cache_dir: Option<PathBuf>,

    /// Print progress and diagnostics to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Map source terms to a target ontology and write a mapping table.
    Map(MapArgs),
    /// Store parsed ontologies in the local cache, or list cached ones.
    Cache(CacheArgs),
    /// Compare a mapping table with curated SSSOM mappings.
    Eval(EvalArgs),
    /// Export the neighbourhood graph of every mapped term in a table.
    Graphs(GraphsArgs),
}

#[derive(Debug, Args)]
pub struct MapArgs {
    /// File with the terms to map, one per line or a table with --csv-column. Use '-' for stdin.
    #[arg(short, long, value_name = "PATH")]
    pub source: PathBuf,

    /// Ontology file or URL; a cache acronym with --use-cache; acronyms (comma-separated or 'all') for remote mappers.
    #[arg(short, long, value_name = "TARGET")]
    pub target: String,

    /// Where to write the mapping table. Defaults to stdout.
    #[arg(short, long, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Matching method: tfidf, levenshtein, jaro, jarowinkler, jaccard, indel, zooma or bioportal.
    #[arg(short, long, default_value_t = MappingConfig::default().mapper, value_parser = parse_mapper)]
    pub mapper: Mapper,

    /// Keep at most this many candidate terms for each input.
    #[arg(long = "top", value_name = "N", default_value_t = MappingConfig::default().max_mappings)]
    pub max_mappings: usize,

    /// Drop candidates scoring below this value (0 to 1).
    #[arg(long, value_name = "SCORE", default_value_t = MappingConfig::default().min_score)]
    pub min_score: f64,

    /// Skip terms flagged as deprecated in the ontology.
    #[arg(long)]
    pub excl_deprecated: bool,

    /// Only consider terms whose IRI starts with one of these prefixes.
    #[arg(long, value_name = "PREFIX", value_delimiter = ',', num_args = 1..)]
    pub base_iris: Vec<String>,

    /// Read the source as a table and take terms from this column.
    #[arg(long, value_name = "NAME")]
    pub csv_column: Option<String>,

    /// Table column carrying an identifier for each source term.
    #[arg(long = "ids-column", value_name = "NAME", requires = "csv_column")]
    pub ids_column: Option<String>,

    /// Field separator for table input.
    #[arg(long, value_name = "CHAR", default_value_t = MappingConfig::default().separator)]
    pub separator: char,

    /// Which kinds of ontology terms may be returned: classes, properties or both.
    #[arg(long, value_name = "KIND", default_value_t = MappingConfig::default().term_type, value_parser = parse_term_type)]
    pub term_type: TermTypeFilter,

    /// Also emit a row for every input that received no mapping.
    #[arg(long)]
    pub incl_unmapped: bool,

    /// Treat --target as the acronym of a cached ontology.
    #[arg(long)]
    pub use_cache: bool,

    /// Also write term graphs as JSON next to --output.
    #[arg(long, requires = "output")]
    pub save_graphs: bool,

    /// Character n-gram length used by the tfidf mapper.
    #[arg(long, value_name = "N", default_value_t = MappingConfig::default().ngram_size)]
    pub ngram_size: usize,

    /// Match against broad synonyms as well as labels and exact synonyms.
    #[arg(long)]
    pub broad_synonyms: bool,

    /// File of regular expressions; matching inputs are tagged and not mapped.
    #[arg(long, value_name = "PATH")]
    pub blocklist: Option<PathBuf>,

    /// File of regular expressions with one capture group; the captured text replaces the input and the pattern becomes a tag.
    #[arg(long, value_name = "PATH")]
    pub templates: Option<PathBuf>,

    /// API key for the bioportal mapper.
    #[arg(long, env = BIOPORTAL_API_KEY_ENV, hide_env_values = true, value_name = "KEY")]
    pub api_key: Option<String>,

    /// Base URL of the remote annotator, replacing the public endpoint.
    #[arg(long, value_name = "URL")]
    pub remote_url: Option<String>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("mode").required(true).args(["locator", "table", "list"])))]
pub struct CacheArgs {
    /// Ontology file or URL to cache.
    #[arg(value_name = "LOCATOR", requires = "acronym")]
    pub locator: Option<String>,

    /// Name to store the ontology under.
    #[arg(value_name = "ACRONYM")]
    pub acronym: Option<String>,

    /// Table with 'acronym' and 'locator' columns; every row is cached.
    #[arg(long, value_name = "PATH", conflicts_with = "locator")]
    pub table: Option<PathBuf>,

    /// Field separator of --table.
    #[arg(long, value_name = "CHAR", default_value_t = ',')]
    pub separator: char,

    /// Show the cached ontologies.
    #[arg(long, conflicts_with_all = ["locator", "table"])]
    pub list: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Mapping table produced by `map`. Repeat to compare several sets, in the same order as --benchmark.
    #[arg(long, value_name = "PATH", required = true)]
    pub tool_output: Vec<PathBuf>,

    /// SSSOM file of curated mappings. Repeat once per --tool-output.
    #[arg(long, value_name = "PATH", required = true)]
    pub benchmark: Vec<PathBuf>,

    /// Ontology that provides the hierarchy; a cache acronym with --use-cache.
    #[arg(long, value_name = "TARGET")]
    pub ontology: String,

    /// Treat --ontology as the acronym of a cached ontology.
    #[arg(long)]
    pub use_cache: bool,

    /// Column names for the summary table. Defaults to the benchmark file names.
    #[arg(long, value_name = "NAME")]
    pub name: Vec<String>,

    /// Write every categorized pair to this CSV file (first set only).
    #[arg(long, value_name = "PATH")]
    pub records: Option<PathBuf>,

    /// Print this many example pairs per category.
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct GraphsArgs {
    /// Mapping table produced by `map`.
    #[arg(long, value_name = "PATH")]
    pub mappings: PathBuf,

    /// Ontology the table was mapped against; a cache acronym with --use-cache.
    #[arg(long, value_name = "TARGET")]
    pub ontology: String,

    /// Treat --ontology as the acronym of a cached ontology.
    #[arg(long)]
    pub use_cache: bool,

    /// Where to write the JSON document. Defaults to stdout.
    #[arg(short, long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

fn parse_mapper(s: &str) -> Result<Mapper, String> {
    s.parse()
}

fn parse_term_type(s: &str) -> Result<TermTypeFilter, String> {
    s.parse()
}
