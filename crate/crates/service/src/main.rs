use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::Parser;
use log::{error, info};

use ontomap_service::{router, AppState, ServiceConfig};

#[derive(Debug, Parser)]
#[command(
    name = "ontomap-server",
    version,
    about = "Serve the ontomap mapping and curation API over HTTP"
)]
struct Args {
    /// Address and port to listen on.
    #[arg(long, default_value = "127.0.0.1:8080")]
    bind: SocketAddr,

    /// Directory for saved curation sessions.
    #[arg(long, value_name = "DIR", default_value = "ontomap-data")]
    data_dir: PathBuf,

    /// Directory holding cached ontologies.
    #[arg(long, env = ontomap::cache::CACHE_DIR_ENV, value_name = "DIR")]
    cache_dir: Option<PathBuf>,

    /// How many jobs may run at once.
    #[arg(long, value_name = "N", default_value_t = 2)]
    workers: usize,

    /// Largest accepted request body, in megabytes.
    #[arg(long, value_name = "MB", default_value_t = 50)]
    max_upload_mb: usize,

    /// Largest ontology document a job may load, in megabytes.
    #[arg(long, value_name = "MB", default_value_t = 50)]
    max_ontology_mb: usize,
}

#[tokio::main]
async fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let config = ServiceConfig {
        data_dir: args.data_dir,
        cache_dir: args.cache_dir,
        workers: args.workers,
        max_upload_bytes: args.max_upload_mb * 1024 * 1024,
        max_ontology_bytes: args.max_ontology_mb * 1024 * 1024,
    };
    let state = match AppState::new(config) {
        Ok(state) => Arc::new(state),
        Err(e) => {
            error!("cannot open the data directory: {e}");
            return ExitCode::from(2);
        }
    };
    let listener = match tokio::net::TcpListener::bind(args.bind).await {
        Ok(l) => l,
        Err(e) => {
            error!("cannot listen on {}: {e}", args.bind);
            return ExitCode::from(2);
        }
    };
    info!("listening on {}", args.bind);
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    match axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
    {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("server error: {e}");
            ExitCode::from(2)
        }
    }
}
