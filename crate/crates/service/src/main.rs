use std::sync::Arc;

use tm_service::{router, JsonlLogStore, LogStore, MemoryLogStore, Service, ServiceConfig};
use tracing::info;
use tracing_subscriber::EnvFilter;

#[tokio::main]
async fn main() {
    tracing_subscriber::fmt().with_env_filter(EnvFilter::from_default_env()).init();
    if let Err(e) = run().await {
        eprintln!("tm-service: {e}");
        std::process::exit(1);
    }
}

async fn run() -> Result<(), String> {
    let config = ServiceConfig::from_env()?;
    let backend = config.backend()?;
    let log: Arc<dyn LogStore> = match &config.log_path {
        Some(path) => Arc::new(JsonlLogStore::open(path).map_err(|e| format!("{}: {e}", path.display()))?),
        None => Arc::new(MemoryLogStore::new()),
    };
    let service = Service::new(backend, config.scoring.clone(), log).with_render_defaults(config.render.clone());
    let listener = tokio::net::TcpListener::bind(&config.bind).await.map_err(|e| format!("{}: {e}", config.bind))?;
    info!(bind = %config.bind, scorer = ?config.scorer, "listening");
    axum::serve(listener, router(service))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| e.to_string())
}
