//! HTTP and server-sent-events front end for the translation pipeline.

pub mod api;
pub mod config;
pub mod http_client;
pub mod state;
pub mod store;

use std::net::SocketAddr;

use thiserror::Error;

pub use api::router;
pub use config::{ConfigError, ServiceConfig};
pub use state::{AppState, JobCounts, StartupError};

#[derive(Debug, Error)]
pub enum ServeError {
    #[error(transparent)]
    Startup(#[from] StartupError),
    #[error("binding {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Serves `state` on an already bound listener until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    state: AppState,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}

/// Binds the configured address and serves until interrupted.
pub async fn run(config: ServiceConfig) -> Result<(), ServeError> {
    let state = AppState::from_config(&config)?;
    let addr = format!("{}:{}", config.server.host, config.server.port);
    let listener = tokio::net::TcpListener::bind(&addr)
        .await
        .map_err(|source| ServeError::Bind { addr: addr.clone(), source })?;
    let local: SocketAddr = listener.local_addr()?;
    tracing::info!(%local, offline = config.offline, pairs = ?state.pipeline.pairs(), "listening");
    serve(listener, state, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await?;
    Ok(())
}
