//! JSON-over-HTTP front end for the enrichment engine.
//!
//! Ontology and corpus are loaded once and shared read-only; the storyset
//! registry is the only state that changes while serving.

mod api;
mod error;
mod state;

use std::future::Future;
use std::sync::Arc;

use axum::http::{header, HeaderValue, Method};
use axum::routing::get;
use axum::Router;
use tower_http::cors::{AllowOrigin, CorsLayer};

pub use api::QueryBody;
pub use error::ApiError;
pub use state::AppState;

/// Origins allowed when none are configured: the explorer's dev server.
pub const DEFAULT_ORIGINS: [&str; 2] = ["http://localhost:5173", "http://127.0.0.1:5173"];

pub fn router(state: Arc<AppState>, allowed_origins: &[String]) -> Router {
    let origins: Vec<HeaderValue> = allowed_origins
        .iter()
        .filter_map(|o| match HeaderValue::from_str(o) {
            Ok(v) => Some(v),
            Err(_) => {
                log::warn!("ignoring invalid CORS origin `{o}`");
                None
            }
        })
        .collect();
    let cors = CorsLayer::new()
        .allow_origin(AllowOrigin::list(origins))
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);

    Router::new()
        .route("/api/v1", get(api::index))
        .route("/api/v1/ontology/stats", get(api::ontology_stats))
        .route("/api/v1/ontology/themes", get(api::list_themes))
        .route("/api/v1/ontology/themes/{name}", get(api::get_theme))
        .route("/api/v1/ontology/themes/{name}/subtree", get(api::subtree))
        .route("/api/v1/storysets", get(api::list_storysets).post(api::create_storyset))
        .route("/api/v1/storysets/{name}", get(api::get_storyset))
        .route("/api/v1/stories", get(api::list_stories))
        .route("/api/v1/stories/{id}", get(api::get_story))
        .route("/api/v1/enrichment", axum::routing::post(api::enrichment))
        .route("/api/v1/compare", axum::routing::post(api::compare))
        .route(
            "/api/v1/negative-control",
            axum::routing::post(api::negative_control_run),
        )
        .fallback(api::not_found)
        .method_not_allowed_fallback(api::method_not_allowed)
        .with_state(state)
        .layer(cors)
}

/// Serves `app` on `listener` until `shutdown` resolves, then drains
/// in-flight requests.
pub async fn serve(
    listener: tokio::net::TcpListener,
    app: Router,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    if let Ok(addr) = listener.local_addr() {
        log::info!("listening on http://{addr}");
    }
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await
}
