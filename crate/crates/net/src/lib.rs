//! Transports for the broadcast hub: newline-framed TCP (or any async byte
//! stream), a WebSocket endpoint, and a blocking client.

mod client;
mod shared;
mod tcp;
mod ws;

pub use client::{Connection, NetError};
pub use shared::{ConnHandle, SharedHub};
pub use tcp::{serve_stream, serve_tcp};
pub use ws::router;

use std::net::SocketAddr;

/// Binds the requested listeners and serves until one of them fails.
pub async fn run_server(
    hub: SharedHub,
    listen: Option<SocketAddr>,
    web_listen: Option<SocketAddr>,
    static_dir: Option<std::path::PathBuf>,
) -> std::io::Result<()> {
    let mut tasks = tokio::task::JoinSet::new();
    if let Some(addr) = listen {
        let l = tokio::net::TcpListener::bind(addr).await?;
        tracing::info!(addr = %l.local_addr()?, "tcp listening");
        tasks.spawn(serve_tcp(l, hub.clone()));
    }
    if let Some(addr) = web_listen {
        let l = tokio::net::TcpListener::bind(addr).await?;
        tracing::info!(addr = %l.local_addr()?, "websocket listening on /ws");
        let app = router(hub.clone(), static_dir);
        tasks.spawn(async move { axum::serve(l, app).await });
    }
    match tasks.join_next().await {
        Some(res) => res.map_err(std::io::Error::other)?,
        None => Ok(()),
    }
}
