use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::Json;
use serde::{Deserialize, Serialize};
use themex_core::engine::{DEFAULT_ALPHA, DEFAULT_SEED};
use themex_core::{
    compare_methods, enrich, negative_control, CountOptions, Domain, EnrichmentQuery, EnrichmentResult, Level,
    LevelSet, Method, MethodOverlap, NegativeControl, NegativeControlReport, OntologyStats, Story, Storyset,
    SubtreeNode, Theme, ThemeId,
};

use crate::error::ApiError;
use crate::state::AppState;

pub type Shared = State<Arc<AppState>>;
type ApiResult<T> = Result<Json<T>, ApiError>;

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ApiError::bad_request("MalformedBody", e.body_text()))
}

fn params<T>(query: Result<Query<T>, QueryRejection>) -> Result<T, ApiError> {
    query
        .map(|Query(v)| v)
        .map_err(|e| ApiError::bad_request("InvalidQuery", e.body_text()))
}

/// Runs CPU-bound engine work off the async executor.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string()))?
}

#[derive(Serialize)]
pub struct Route {
    method: &'static str,
    path: &'static str,
    summary: &'static str,
}

pub const ROUTES: [(&str, &str, &str); 13] = [
    ("GET", "/api/v1", "this listing"),
    (
        "GET",
        "/api/v1/ontology/stats",
        "per-domain theme, leaf and height statistics",
    ),
    (
        "GET",
        "/api/v1/ontology/themes",
        "themes filtered by ?domain= and ?q=, paged by ?page=&per_page=",
    ),
    (
        "GET",
        "/api/v1/ontology/themes/{name}",
        "one theme with its ancestors and children",
    ),
    (
        "GET",
        "/api/v1/ontology/themes/{name}/subtree",
        "nested subtree, limited by ?depth=",
    ),
    ("GET", "/api/v1/storysets", "registered storysets"),
    (
        "POST",
        "/api/v1/storysets",
        "create a storyset from story_ids or a collection tag",
    ),
    ("GET", "/api/v1/storysets/{name}", "one storyset"),
    ("GET", "/api/v1/stories", "all stories"),
    (
        "GET",
        "/api/v1/stories/{id}",
        "story with its observed and latent themes",
    ),
    ("POST", "/api/v1/enrichment", "run an enrichment query"),
    (
        "POST",
        "/api/v1/compare",
        "overlap of the top themes by p-value and by TF-IDF",
    ),
    (
        "POST",
        "/api/v1/negative-control",
        "enrichment on random test storysets",
    ),
];

#[derive(Serialize)]
pub struct Index {
    name: &'static str,
    version: &'static str,
    routes: Vec<Route>,
}

pub async fn index() -> Json<Index> {
    Json(Index {
        name: "themex",
        version: env!("CARGO_PKG_VERSION"),
        routes: ROUTES
            .iter()
            .map(|&(method, path, summary)| Route { method, path, summary })
            .collect(),
    })
}

pub async fn not_found() -> ApiError {
    ApiError::not_found("NotFound", "no such route")
}

pub async fn method_not_allowed() -> ApiError {
    ApiError::new(
        StatusCode::METHOD_NOT_ALLOWED,
        "MethodNotAllowed",
        "method not allowed on this route",
    )
}

pub async fn ontology_stats(State(state): Shared) -> Json<OntologyStats> {
    Json(state.ontology.stats())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThemeFilter {
    domain: Option<String>,
    q: Option<String>,
    page: Option<usize>,
    per_page: Option<usize>,
}

#[derive(Serialize)]
pub struct ThemePage {
    total: usize,
    page: usize,
    per_page: usize,
    themes: Vec<Theme>,
}

/// Without `per_page` every matching theme is returned on one page.
pub async fn list_themes(
    State(state): Shared,
    query: Result<Query<ThemeFilter>, QueryRejection>,
) -> ApiResult<ThemePage> {
    let filter = params(query)?;
    let domain = match filter.domain.as_deref().filter(|d| !d.is_empty()) {
        Some(d) => Some(
            d.parse::<Domain>()
                .map_err(|e| ApiError::bad_request("InvalidQuery", e))?,
        ),
        None => None,
    };
    let needle = filter.q.unwrap_or_default().to_lowercase();
    let matching: Vec<&Theme> = state
        .ontology
        .themes()
        .filter(|t| domain.is_none_or(|d| t.domain == d))
        .filter(|t| needle.is_empty() || t.name.to_lowercase().contains(&needle))
        .collect();
    let total = matching.len();
    let per_page = match filter.per_page {
        Some(0) => return Err(ApiError::bad_request("InvalidQuery", "per_page must be at least 1")),
        Some(p) => p,
        None => total.max(1),
    };
    let page = filter.page.unwrap_or(1);
    if page == 0 {
        return Err(ApiError::bad_request("InvalidQuery", "page numbers start at 1"));
    }
    let themes = matching
        .into_iter()
        .skip((page - 1).saturating_mul(per_page))
        .take(per_page)
        .cloned()
        .collect();
    Ok(Json(ThemePage {
        total,
        page,
        per_page,
        themes,
    }))
}

#[derive(Serialize)]
pub struct ThemeDetail {
    #[serde(flatten)]
    theme: Theme,
    ancestors: Vec<String>,
    children: Vec<String>,
}

pub async fn get_theme(State(state): Shared, Path(name): Path<String>) -> ApiResult<ThemeDetail> {
    let o = &state.ontology;
    let id = o.id(&name)?;
    Ok(Json(ThemeDetail {
        theme: o.theme(id).clone(),
        ancestors: o.ancestors(&name)?.into_iter().map(String::from).collect(),
        children: o.children_ids(id).iter().map(|&c| o.name(c).to_string()).collect(),
    }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepthParam {
    depth: Option<usize>,
}

pub async fn subtree(
    State(state): Shared,
    Path(name): Path<String>,
    query: Result<Query<DepthParam>, QueryRejection>,
) -> ApiResult<SubtreeNode> {
    let depth = params(query)?.depth;
    Ok(Json(state.ontology.subtree(&name, depth)?))
}

#[derive(Serialize)]
pub struct StorysetView {
    name: String,
    size: usize,
    story_ids: Vec<String>,
}

impl From<&Storyset> for StorysetView {
    fn from(set: &Storyset) -> Self {
        StorysetView {
            name: set.name().to_string(),
            size: set.len(),
            story_ids: set.ids().to_vec(),
        }
    }
}

pub async fn list_storysets(State(state): Shared) -> Json<Vec<StorysetView>> {
    Json(state.storysets().iter().map(StorysetView::from).collect())
}

pub async fn get_storyset(State(state): Shared, Path(name): Path<String>) -> ApiResult<StorysetView> {
    let set = state
        .storyset(&name)
        .map_err(|e| ApiError::not_found(e.code, e.message))?;
    Ok(Json(StorysetView::from(&set)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewStoryset {
    name: String,
    story_ids: Option<Vec<String>>,
    collection: Option<String>,
}

pub async fn create_storyset(
    State(state): Shared,
    payload: Result<Json<NewStoryset>, JsonRejection>,
) -> Result<(StatusCode, Json<StorysetView>), ApiError> {
    let req = body(payload)?;
    let name = req.name.trim();
    if name.is_empty() || name.contains(char::is_whitespace) {
        return Err(ApiError::bad_request(
            "InvalidStoryset",
            "storyset names must be nonempty and without whitespace",
        ));
    }
    let set = match (req.story_ids, req.collection) {
        (Some(ids), None) => state.corpus.make_storyset(name, ids)?,
        (None, Some(tag)) => state.corpus.from_collection_tag(name, &tag),
        _ => {
            return Err(ApiError::bad_request(
                "InvalidStoryset",
                "give exactly one of `story_ids` or `collection`",
            ))
        }
    };
    if set.is_empty() {
        return Err(ApiError::bad_request(
            "InvalidStoryset",
            format!("storyset `{name}` would be empty"),
        ));
    }
    state.add_storyset(set.clone())?;
    log::info!("created storyset `{}` with {} stories", set.name(), set.len());
    Ok((StatusCode::CREATED, Json(StorysetView::from(&set))))
}

pub async fn list_stories(State(state): Shared) -> Json<Vec<Story>> {
    Json(state.corpus.stories().to_vec())
}

#[derive(Serialize)]
pub struct FeaturedTheme {
    theme: String,
    domain: Domain,
    level: Level,
}

#[derive(Serialize)]
pub struct StoryProfile {
    #[serde(flatten)]
    story: Story,
    observed: Vec<FeaturedTheme>,
    latent: Vec<FeaturedTheme>,
}

pub async fn get_story(State(state): Shared, Path(id): Path<String>) -> ApiResult<StoryProfile> {
    let (Some(story), Some(profile)) = (state.corpus.story(&id), state.corpus.profile(&id)) else {
        return Err(ApiError::not_found("UnknownStory", format!("no story with id `{id}`")));
    };
    let o = &state.ontology;
    let view = |list: &[(ThemeId, Level)]| {
        list.iter()
            .map(|&(t, level)| FeaturedTheme {
                theme: o.name(t).to_string(),
                domain: o.theme(t).domain,
                level,
            })
            .collect()
    };
    Ok(Json(StoryProfile {
        story: story.clone(),
        observed: view(&profile.observed),
        latent: view(&profile.latent),
    }))
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

fn default_true() -> bool {
    true
}

fn default_min_k() -> u64 {
    1
}

/// Enrichment query with storysets referenced by name.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryBody {
    pub test: String,
    pub background: String,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub levels: LevelSet,
    #[serde(default = "default_true")]
    pub include_latent: bool,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub top: Option<usize>,
    #[serde(default = "default_min_k", rename = "min_K", alias = "min_k")]
    pub min_k: u64,
}

#[derive(Serialize)]
pub struct QueryEcho {
    #[serde(flatten)]
    body: QueryBody,
    n: usize,
    #[serde(rename = "N")]
    big_n: usize,
}

#[derive(Serialize)]
pub struct EnrichmentResponse {
    query: QueryEcho,
    results: Vec<EnrichmentResult>,
}

fn build_query(state: &AppState, q: &QueryBody) -> Result<EnrichmentQuery, ApiError> {
    let mut query = EnrichmentQuery::new(state.storyset(&q.test)?, state.storyset(&q.background)?);
    query.alpha = q.alpha;
    query.levels = q.levels;
    query.include_latent = q.include_latent;
    query.method = q.method;
    query.top = q.top;
    query.min_k = q.min_k;
    Ok(query)
}

pub async fn enrichment(
    State(state): Shared,
    payload: Result<Json<QueryBody>, JsonRejection>,
) -> ApiResult<EnrichmentResponse> {
    let q = body(payload)?;
    let query = build_query(&state, &q)?;
    let results = blocking(move || Ok(enrich(&state.corpus, &state.ontology, &query)?)).await?;
    let (n, big_n) = results
        .first()
        .map(|r| (r.n as usize, r.big_n as usize))
        .unwrap_or_default();
    Ok(Json(EnrichmentResponse {
        query: QueryEcho { body: q, n, big_n },
        results,
    }))
}

/// Body of `/compare`: an enrichment query plus optional `top_m`.
pub async fn compare(
    State(state): Shared,
    payload: Result<Json<serde_json::Map<String, serde_json::Value>>, JsonRejection>,
) -> ApiResult<MethodOverlap> {
    let mut fields = body(payload)?;
    let top_m = match fields.remove("top_m") {
        None => 20,
        Some(v) => v
            .as_u64()
            .ok_or_else(|| ApiError::bad_request("MalformedBody", "top_m must be a nonnegative integer"))?
            as usize,
    };
    let q: QueryBody =
        serde_json::from_value(fields.into()).map_err(|e| ApiError::bad_request("MalformedBody", e.to_string()))?;
    let mut query = build_query(&state, &q)?;
    query.top = None;
    let overlap = blocking(move || {
        let results = enrich(&state.corpus, &state.ontology, &query)?;
        Ok(compare_methods(&results, top_m)?)
    })
    .await?;
    Ok(Json(overlap))
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlBody {
    background: String,
    n: usize,
    trials: usize,
    #[serde(default = "default_alpha")]
    alpha: f64,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default)]
    levels: LevelSet,
    #[serde(default = "default_true")]
    include_latent: bool,
}

pub async fn negative_control_run(
    State(state): Shared,
    payload: Result<Json<ControlBody>, JsonRejection>,
) -> ApiResult<NegativeControlReport> {
    let req = body(payload)?;
    let control = NegativeControl {
        background: state.storyset(&req.background)?,
        n: req.n,
        trials: req.trials,
        alpha: req.alpha,
        seed: req.seed,
        options: CountOptions {
            levels: req.levels,
            include_latent: req.include_latent,
        },
    };
    let report = blocking(move || Ok(negative_control(&state.corpus, &state.ontology, &control)?)).await?;
    Ok(Json(report))
}
