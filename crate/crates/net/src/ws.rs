//! WebSocket endpoint for browser clients. Each text message carries one
//! frame without its line terminator; inbound messages may also bundle
//! several newline-separated frames.

use std::path::PathBuf;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use futures::{SinkExt, StreamExt};
use tower_http::services::ServeDir;

use crate::shared::SharedHub;

/// `/ws` upgrades to the frame protocol; everything else is served from
/// `static_dir` when given.
pub fn router(hub: SharedHub, static_dir: Option<PathBuf>) -> Router {
    let app = Router::new().route("/ws", get(upgrade)).with_state(hub);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

async fn upgrade(ws: WebSocketUpgrade, State(hub): State<SharedHub>) -> Response {
    ws.on_upgrade(move |socket| serve_socket(socket, hub))
}

async fn serve_socket(socket: WebSocket, hub: SharedHub) {
    let (mut tx, mut rx) = socket.split();
    let conn = hub.open();
    loop {
        tokio::select! {
            msg = rx.next() => match msg {
                Some(Ok(Message::Text(text))) => {
                    for line in text.as_str().lines().filter(|l| !l.is_empty()) {
                        if let Err(e) = conn.receive(line) {
                            tracing::warn!(conn = conn.id(), error = %e, "malformed frame ignored");
                        }
                    }
                }
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                Some(Ok(_)) => {}
            },
            _ = conn.wait() => {
                let Some(frames) = conn.drain() else {
                    let _ = tx.send(Message::Close(None)).await;
                    return;
                };
                for f in frames {
                    if tx.feed(Message::text(&*f)).await.is_err() {
                        return;
                    }
                }
                if tx.flush().await.is_err() {
                    return;
                }
            }
        }
    }
}
