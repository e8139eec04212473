mod args;

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use log::{info, warn};
use thiserror::Error;

use args::{CacheArgs, Cli, Command, EvalArgs, GraphsArgs, MapArgs};
use ontomap::cache::{read_cache_table, CacheError, CacheStore};
use ontomap::engine::{
    export_term_graphs, map_terms_in, mapping_table_bytes, read_mapping_table, read_source_terms, resolve_ontology,
    EngineError, InputError, MappingConfig, RemoteSettings, SourceInput, TableError,
};
use ontomap::evaluation::{compare_sets, format_summary_table, parse_sssom, records_csv, EvalError};
use ontomap::ontology::build_hierarchy;
use ontomap::preprocess::parse_pattern_file;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Input(#[from] InputError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }
}

fn read_path(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_path(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match output {
        Some(path) => write_path(path, bytes),
        None => io::stdout().write_all(bytes).map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

fn patterns(path: Option<&Path>) -> Result<Vec<String>, CliError> {
    match path {
        None => Ok(Vec::new()),
        Some(path) => {
            let bytes = read_path(path)?;
            Ok(parse_pattern_file(&String::from_utf8_lossy(&bytes)))
        }
    }
}

fn store(dir: Option<&Path>) -> CacheStore {
    dir.map(CacheStore::new).unwrap_or_else(CacheStore::from_env)
}

fn config_from(args: &MapArgs) -> Result<MappingConfig, CliError> {
    let config = MappingConfig {
        mapper: args.mapper,
        max_mappings: args.max_mappings,
        min_score: args.min_score,
        excl_deprecated: args.excl_deprecated,
        base_iris: args.base_iris.clone(),
        term_type: args.term_type,
        incl_unmapped: args.incl_unmapped,
        ngram_size: args.ngram_size,
        include_broad_synonyms: args.broad_synonyms,
        csv_column: args.csv_column.clone(),
        source_terms_ids_column: args.ids_column.clone(),
        separator: args.separator,
        use_cache: args.use_cache,
        save_graphs: args.save_graphs,
        output_file: args.output.clone(),
        blocklist: patterns(args.blocklist.as_deref())?,
        templates: patterns(args.templates.as_deref())?,
        remote: RemoteSettings {
            api_key: args.api_key.clone(),
            base_url: args.remote_url.clone(),
            ..RemoteSettings::default()
        },
    };
    config.validate().map_err(CliError::Usage)?;
    Ok(config)
}

/// `foo/out.csv` → `foo/out.graphs.json`
fn graphs_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    output.with_file_name(format!("{stem}.graphs.json"))
}

fn run_map(args: MapArgs, cache: &CacheStore) -> Result<(), CliError> {
    let config = config_from(&args)?;
    let input = if args.source.as_os_str() == "-" {
        let mut text = String::new();
        io::stdin().read_to_string(&mut text).map_err(|source| CliError::Io {
            path: "<stdin>".into(),
            source,
        })?;
        SourceInput::Text(text)
    } else {
        SourceInput::file(&args.source)
    };
    let terms = read_source_terms(&input, &config)?;
    info!("mapping {} source terms with {}", terms.len(), config.mapper);

    let table = if config.save_graphs && !config.mapper.is_remote() {
        let ontology = resolve_ontology(&args.target, &config, cache)?;
        let table = ontomap::engine::map_terms_with_ontology(terms, &ontology, &config)?;
        let graphs = export_term_graphs(&table, &ontology, &build_hierarchy(&ontology));
        let output = args
            .output
            .as_deref()
            .expect("clap requires --output with --save-graphs");
        let json = serde_json::to_vec_pretty(&graphs).map_err(|e| CliError::Failed(e.to_string()))?;
        write_path(&graphs_path(output), &json)?;
        table
    } else {
        if config.save_graphs {
            warn!(
                "term graphs need a local ontology; --save-graphs is ignored for {}",
                config.mapper
            );
        }
        map_terms_in(terms, &args.target, &config, cache)?
    };
    for failure in &table.failures {
        warn!("'{}' could not be mapped: {}", failure.source.text, failure.reason);
    }
    info!(
        "{} rows, {} unmapped, {} failed",
        table.rows.len(),
        table.unmapped.len(),
        table.failures.len()
    );
    emit(args.output.as_deref(), &mapping_table_bytes(&table)?)
}

fn run_cache(args: CacheArgs, cache: &CacheStore) -> Result<(), CliError> {
    if args.list {
        let mut out = String::new();
        for e in cache.list() {
            out.push_str(&format!(
                "{}\t{} terms\t{}\t{}\n",
                e.acronym,
                e.term_count,
                e.created_at.format("%Y-%m-%d %H:%M:%S"),
                e.source_locator
            ));
        }
        return emit(None, out.as_bytes());
    }
    if let Some(table) = &args.table {
        let rows = read_cache_table(&read_path(table)?, args.separator)?;
        let report = cache.cache_ontology_set(&rows);
        for w in &report.warnings {
            warn!("{w}");
        }
        for e in &report.entries {
            println!("cached {} ({} terms)", e.acronym, e.term_count);
        }
        for f in &report.failures {
            eprintln!("failed {} from {}: {}", f.acronym, f.locator, f.message);
        }
        return if report.failures.is_empty() {
            Ok(())
        } else {
            Err(CliError::Failed(format!(
                "{} of {} ontologies failed",
                report.failures.len(),
                rows.len()
            )))
        };
    }
    let (Some(locator), Some(acronym)) = (&args.locator, &args.acronym) else {
        return Err(CliError::Usage(
            "cache needs LOCATOR and ACRONYM, --table or --list".into(),
        ));
    };
    let entry = cache.cache_ontology(locator, acronym)?;
    println!(
        "cached {} ({} terms) in {}",
        entry.acronym,
        entry.term_count,
        entry.path.display()
    );
    Ok(())
}

fn run_eval(args: EvalArgs, cache: &CacheStore) -> Result<(), CliError> {
    if args.tool_output.len() != args.benchmark.len() {
        return Err(CliError::Usage(format!(
            "{} --tool-output value(s) but {} --benchmark value(s)",
            args.tool_output.len(),
            args.benchmark.len()
        )));
    }
    if !args.name.is_empty() && args.name.len() != args.benchmark.len() {
        return Err(CliError::Usage("give one --name per --benchmark".into()));
    }
    let config = MappingConfig {
        use_cache: args.use_cache,
        ..MappingConfig::default()
    };
    let ontology = resolve_ontology(&args.ontology, &config, cache)?;
    let hierarchy = build_hierarchy(&ontology);

    let mut results = Vec::new();
    for (i, (tool, bench)) in args.tool_output.iter().zip(&args.benchmark).enumerate() {
        let table = read_mapping_table(tool)?;
        let benchmark = parse_sssom(&read_path(bench)?)?;
        if benchmark.dropped > 0 {
            info!(
                "{}: skipped {} rows of inputs with several mappings",
                bench.display(),
                benchmark.dropped
            );
        }
        let name = args.name.get(i).cloned().unwrap_or_else(|| {
            bench
                .file_name()
                .map(|n| {
                    n.to_string_lossy()
                        .trim_end_matches(".tsv")
                        .trim_end_matches(".sssom")
                        .to_string()
                })
                .unwrap_or_else(|| format!("set {}", i + 1))
        });
        results.push((
            name,
            compare_sets(&table, &benchmark.mappings, &hierarchy, args.samples),
        ));
    }

    let summaries: Vec<(&str, _)> = results.iter().map(|(n, c)| (n.as_str(), &c.summary)).collect();
    let mut out = format_summary_table(&summaries);
    if args.samples > 0 {
        for (name, comparison) in &results {
            for (category, records) in &comparison.samples {
                out.push_str(&format!("\n{name} / {}:\n", category.label()));
                for r in records {
                    out.push_str(&format!("  {}\t{}\t{}\n", r.input_text, r.tool_iri, r.benchmark_iri));
                }
            }
        }
    }
    emit(None, out.as_bytes())?;
    if let (Some(path), Some((_, first))) = (&args.records, results.first()) {
        let bytes = records_csv(&first.records).map_err(|e| CliError::Failed(e.to_string()))?;
        write_path(path, &bytes)?;
    }
    Ok(())
}

fn run_graphs(args: GraphsArgs, cache: &CacheStore) -> Result<(), CliError> {
    let table = read_mapping_table(&args.mappings)?;
    let config = MappingConfig {
        use_cache: args.use_cache,
        ..MappingConfig::default()
    };
    let ontology = resolve_ontology(&args.ontology, &config, cache)?;
    let graphs = export_term_graphs(&table, &ontology, &build_hierarchy(&ontology));
    let mut json = serde_json::to_vec_pretty(&graphs).map_err(|e| CliError::Failed(e.to_string()))?;
    json.push(b'\n');
    emit(args.output.as_deref(), &json)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cache = store(cli.cache_dir.as_deref());
    match cli.command {
        Command::Map(args) => run_map(args, &cache),
        Command::Cache(args) => run_cache(args, &cache),
        Command::Eval(args) => run_eval(args, &cache),
        Command::Graphs(args) => run_graphs(args, &cache),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
