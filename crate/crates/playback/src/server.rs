use std::io;
use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use log::{debug, info};
use tokio::net::TcpListener;

use crate::Hub;

/// Routes: `/ws` speaks the session protocol, `/` answers with a short banner.
pub fn router(hub: Arc<Hub>) -> Router {
    Router::new()
        .route(
            "/",
            get(|| async { "revint playback service: connect a WebSocket to /ws\n" }),
        )
        .route("/ws", get(upgrade))
        .with_state(hub)
}

pub async fn serve(listener: TcpListener, hub: Arc<Hub>) -> io::Result<()> {
    info!("playback service listening on {}", listener.local_addr()?);
    axum::serve(listener, router(hub)).await
}

async fn upgrade(ws: WebSocketUpgrade, State(hub): State<Arc<Hub>>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| connection(socket, hub))
}

/// Sessions created on a connection are dropped when it closes.
struct Owned {
    hub: Arc<Hub>,
    ids: Vec<String>,
}

impl Drop for Owned {
    fn drop(&mut self) {
        for id in &self.ids {
            self.hub.remove(id);
        }
    }
}

async fn connection(mut socket: WebSocket, hub: Arc<Hub>) {
    let mut owned = Owned {
        hub: hub.clone(),
        ids: Vec::new(),
    };
    // Requests on a connection are answered strictly in order.
    while let Some(Ok(msg)) = socket.recv().await {
        let text = match msg {
            Message::Text(text) => text.to_string(),
            Message::Close(_) => break,
            _ => continue,
        };
        let worker = hub.clone();
        // Long seeks step the integrator many times; keep them off the reactor.
        let reply = tokio::task::spawn_blocking(move || worker.handle(&text)).await;
        let (reply, created) = match reply {
            Ok(r) => r,
            Err(e) => {
                debug!("request handler failed: {e}");
                break;
            }
        };
        owned.ids.extend(created);
        if socket.send(Message::Text(reply.into())).await.is_err() {
            break;
        }
    }
}
