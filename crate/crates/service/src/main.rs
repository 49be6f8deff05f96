use std::net::SocketAddr;
use std::path::PathBuf;

use anyhow::Context;
use clap::Parser;
use lexcomp_service::{router, with_cors, AppState};

/// Serve complexity scores and substitution suggestions over HTTP.
#[derive(Parser, Debug)]
#[command(name = "lexcomp-serve", version)]
struct Args {
    /// Exported index file.
    #[arg(long, env = "LEXCOMP_INDEX")]
    index: PathBuf,
    /// Word vectors in text format; /suggest answers 409 without them.
    #[arg(long, env = "LEXCOMP_VECTORS")]
    vectors: Option<PathBuf>,
    #[arg(long, env = "LEXCOMP_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    /// Origin allowed to call the API from a browser ("*" for any).
    #[arg(long, env = "LEXCOMP_CORS_ORIGIN")]
    cors_origin: Option<String>,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();

    let state = AppState::load(&args.index, args.vectors.as_deref())?;
    log::info!(
        "index: m={} entries={}; vectors: {}",
        state.index.m(),
        state.index.len(),
        state.vectors.as_ref().map_or("none".to_string(), |v| format!("{} x {}", v.len(), v.dim()))
    );

    let mut app = router(state);
    if let Some(origin) = &args.cors_origin {
        app = with_cors(app, origin)?;
    }

    let addr = SocketAddr::new(args.host, args.port);
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("binding {addr}"))?;
    log::info!("listening on http://{addr}");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
