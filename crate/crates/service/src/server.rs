use std::future::Future;
use std::net::SocketAddr;
use std::sync::Arc;

use tokio::net::TcpListener;
use tokio::sync::RwLock;

use crate::api::{router, AppState};
use crate::config::ServiceConfig;
use crate::store::Store;

/// Binds `config.listen` and returns the bound address plus the server future.
pub async fn bind(
    config: &ServiceConfig,
    store: Store,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<(SocketAddr, impl Future<Output = std::io::Result<()>>)> {
    let state = Arc::new(AppState {
        store: RwLock::new(store),
        params: config.reputation.clone(),
        scope: config.shown_set_scope,
    });
    let listener = TcpListener::bind(&config.listen).await?;
    let addr = listener.local_addr()?;
    let server = axum::serve(listener, router(state)).with_graceful_shutdown(shutdown);
    Ok((addr, async move { server.await }))
}

/// Opens the configured log and serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> anyhow::Result<()> {
    let store = Store::open(&config.log_path, config.fsync)?;
    tracing::info!(
        events = store.state().event_count(),
        log = %config.log_path.display(),
        "replayed event log"
    );
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    let (addr, server) = bind(&config, store, shutdown).await?;
    tracing::info!(%addr, "listening");
    server.await?;
    Ok(())
}
