//! HTTP middleware for the wayfinder and location-based recommendation
//! endpoints.
//!
//! Every handled request appends one JSON Lines [`ApiLogEntry`] to the
//! transaction log, which the telemetry tools read back.
//!
//! [`ApiLogEntry`]: biblio_core::log::ApiLogEntry

pub mod config;
pub mod logsink;
pub mod routes;
pub mod state;

use std::future::Future;
use std::net::SocketAddr;
use std::sync::Arc;

use tokio::net::TcpListener;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

pub use config::{ConfigError, GatewayConfig};
pub use logsink::LogSink;
pub use routes::{router, Gateway, LocateRequest, LocateResponse, MapDataResponse, SIMULATED_TIME_HEADER};
pub use state::{AppState, StateError};

/// A running server bound to a local port.
#[derive(Debug)]
pub struct ServerHandle {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    task: JoinHandle<std::io::Result<()>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Stops accepting connections and waits for in-flight requests.
    pub async fn shutdown(mut self) -> std::io::Result<()> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        self.task.await.map_err(std::io::Error::other)?
    }
}

/// Binds `addr` (port 0 picks a free port) and serves in a background task.
pub async fn spawn(gateway: Arc<Gateway>, addr: SocketAddr) -> std::io::Result<ServerHandle> {
    let listener = TcpListener::bind(addr).await?;
    let addr = listener.local_addr()?;
    let (tx, rx) = oneshot::channel::<()>();
    let app = router(gateway);
    let task = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = rx.await;
            })
            .await
    });
    Ok(ServerHandle {
        addr,
        shutdown: Some(tx),
        task,
    })
}

/// Serves on `addr` until `stop` resolves.
pub async fn serve_until(
    gateway: Arc<Gateway>,
    addr: SocketAddr,
    stop: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let listener = TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "gateway listening");
    axum::serve(listener, router(gateway)).with_graceful_shutdown(stop).await
}
