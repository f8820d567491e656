//! HTTP front end for the descry engine.
//!
//! | method | path | body |
//! |---|---|---|
//! | GET | `/categories` | |
//! | GET | `/categories/{id}` | |
//! | PUT | `/categories/{id}/descriptors` | phrase list, subgroup map or category entry |
//! | POST | `/classify` | `{image_id, mode?, baseline?}` |
//! | POST | `/explain` | `{image_id, contrast?, mode?}` |
//! | POST | `/embeddings` | text-store chunk or `{text: vector}` |
//! | POST | `/save` | |
//!
//! Every response carries the session version in `X-Descry-Version` and
//! `ETag`. Edits and embedding uploads bump it by one; `If-Match` on a PUT
//! makes the edit conditional on it.

mod error;
mod routes;
mod state;

use std::net::SocketAddr;
use std::sync::Arc;

pub use error::{ApiError, ApiResult};
pub use routes::{router, VERSION_HEADER};
pub use state::{AppState, Snapshot};

/// Environment variable consulted for the port when none is given.
pub const PORT_ENV: &str = "DESCRY_PORT";
pub const DEFAULT_PORT: u16 = 8080;

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = terminate => {}
    }
}

/// Serves until interrupted, then writes the dictionary file if one is configured.
pub async fn serve(addr: SocketAddr, state: Arc<AppState>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state.clone()))
        .with_graceful_shutdown(shutdown_signal())
        .await?;
    match state.save() {
        Ok(Some((path, version))) => log::info!("saved version {version} to {}", path.display()),
        Ok(None) => {}
        Err(e) => log::error!("could not save dictionaries on shutdown: {e}"),
    }
    Ok(())
}
