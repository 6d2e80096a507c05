use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use themex_core::{load_corpus, load_storysets, parse_ontology};
use themex_service::{router, AppState};
use tower::ServiceExt;

fn read(rel: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(rel);
    std::fs::read_to_string(path).unwrap()
}

fn startrek_state() -> AppState {
    let o = parse_ontology(&read("startrek/themes.tsv")).unwrap();
    let c = load_corpus(&read("startrek/stories.tsv"), &read("startrek/annotations.tsv"), &o).unwrap();
    let sets = load_storysets(&read("startrek/storysets.tsv"), &c).unwrap();
    AppState::new(o, c, sets)
}

fn app(state: AppState) -> Router {
    router(Arc::new(state), &["http://explorer.test".to_string()])
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes) = call_raw(app, method, uri, body.map(|b| b.to_string())).await;
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (status, value)
}

async fn call_raw(app: &Router, method: Method, uri: &str, body: Option<String>) -> (StatusCode, Vec<u8>) {
    let mut req = Request::builder().method(method).uri(uri);
    if body.is_some() {
        req = req.header(header::CONTENT_TYPE, "application/json");
    }
    let req = req.body(body.map(Body::from).unwrap_or_else(Body::empty)).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

fn is_error(v: &Value, code: &str) -> bool {
    v["code"] == code && v["message"].is_string() && v.as_object().unwrap().len() == 2
}

#[tokio::test]
async fn index_lists_routes() {
    let app = app(startrek_state());
    let (status, v) = call(&app, Method::GET, "/api/v1", None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(v["routes"]
        .as_array()
        .unwrap()
        .iter()
        .any(|r| r["path"] == "/api/v1/enrichment"));
}

#[tokio::test]
async fn full_ontology_lists_every_theme() {
    let o = parse_ontology(&read("ontology/themes.tsv")).unwrap();
    let c = load_corpus("id\ttitle\tcollections\n", "story_id\ttheme\tlevel\n", &o).unwrap();
    let app = app(AppState::new(o, c, Vec::new()));
    let (status, v) = call(&app, Method::GET, "/api/v1/ontology/themes", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["total"], 1536);
    assert_eq!(v["themes"].as_array().unwrap().len(), 1536);

    let (_, v) = call(&app, Method::GET, "/api/v1/ontology/themes?domain=society", None).await;
    assert_eq!(v["total"], 279);
    assert!(v["themes"].as_array().unwrap().iter().all(|t| t["domain"] == "society"));

    let (_, v) = call(
        &app,
        Method::GET,
        "/api/v1/ontology/themes?domain=society&per_page=50&page=6",
        None,
    )
    .await;
    assert_eq!(v["themes"].as_array().unwrap().len(), 29);

    let (status, v) = call(&app, Method::GET, "/api/v1/ontology/themes?q=zzzz-nothing", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["total"], 0);
    assert!(v["themes"].as_array().unwrap().is_empty());

    let (_, v) = call(
        &app,
        Method::GET,
        "/api/v1/ontology/themes/literary%20thematic%20entity/subtree?depth=1",
        None,
    )
    .await;
    assert_eq!(v["children"].as_array().unwrap().len(), 4);

    let (status, v) = call(&app, Method::GET, "/api/v1/ontology/themes?domain=nowhere", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(is_error(&v, "InvalidQuery"));
}

#[tokio::test]
async fn subtree_routes() {
    let app = app(startrek_state());
    let (status, v) = call(&app, Method::GET, "/api/v1/ontology/themes/tribble/subtree", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["name"], "tribble");
    assert!(v["children"].as_array().unwrap().is_empty());

    let (status, v) = call(
        &app,
        Method::GET,
        "/api/v1/ontology/themes/no%20such%20theme/subtree",
        None,
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(is_error(&v, "UnknownTheme"));

    let (status, v) = call(
        &app,
        Method::GET,
        "/api/v1/ontology/themes/%C3%BCber-belligerent%20alien",
        None,
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert!(v["ancestors"]
        .as_array()
        .unwrap()
        .contains(&json!("culturally distinguished life form")));
}

#[tokio::test]
async fn storysets_can_be_created_and_listed() {
    let app = app(startrek_state());
    let (status, v) = call(
        &app,
        Method::POST,
        "/api/v1/storysets",
        Some(json!({"name": "pair", "story_ids": ["TOS02", "TOS01", "TOS02"]})),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(v["story_ids"], json!(["TOS02", "TOS01"]));

    let (_, v) = call(&app, Method::GET, "/api/v1/storysets", None).await;
    assert!(v
        .as_array()
        .unwrap()
        .iter()
        .any(|s| s["name"] == "pair" && s["size"] == 2));

    let (status, v) = call(
        &app,
        Method::POST,
        "/api/v1/storysets",
        Some(json!({"name": "tas2", "collection": "TAS"})),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(v["size"], 22);

    let (status, v) = call(
        &app,
        Method::POST,
        "/api/v1/storysets",
        Some(json!({"name": "pair", "story_ids": ["TOS03"]})),
    )
    .await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert!(is_error(&v, "StorysetExists"));

    let (status, v) = call(
        &app,
        Method::POST,
        "/api/v1/storysets",
        Some(json!({"name": "bad", "story_ids": ["XYZ"]})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(is_error(&v, "UnknownStory"));
}

#[tokio::test]
async fn created_storysets_are_persisted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("storysets.tsv");
    let app = app(startrek_state().persist_to(&path));
    let (status, _) = call(
        &app,
        Method::POST,
        "/api/v1/storysets",
        Some(json!({"name": "two", "story_ids": ["TAS01", "TAS02"]})),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.starts_with("storyset\tstory_id\n"));
    assert!(written.ends_with("two\tTAS01\ntwo\tTAS02\n"));
    assert!(written.contains("klingon-tos-tas\tTOS12\n"));
}

#[tokio::test]
async fn story_profile_includes_latent_themes() {
    let app = app(startrek_state());
    let (status, v) = call(&app, Method::GET, "/api/v1/stories/TOS12", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["id"], "TOS12");
    let names = |key: &str| -> Vec<String> {
        v[key]
            .as_array()
            .unwrap()
            .iter()
            .map(|t| t["theme"].as_str().unwrap().to_string())
            .collect()
    };
    assert!(names("observed").contains(&"über-belligerent alien".to_string()));
    assert!(names("latent").contains(&"culturally distinguished life form".to_string()));

    let (status, v) = call(&app, Method::GET, "/api/v1/stories/NOPE", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(is_error(&v, "UnknownStory"));
}

#[tokio::test]
async fn enrichment_on_klingon_fixture() {
    let app = app(startrek_state());
    let query = json!({"test": "klingon-tos-tas", "background": "tos-tas", "top": 20});
    let (status, v) = call(&app, Method::POST, "/api/v1/enrichment", Some(query.clone())).await;
    assert_eq!(status, StatusCode::OK);
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 20);
    assert_eq!(results[0]["theme"], "über-belligerent alien");
    assert_eq!(results[0]["rank"], 1);
    let fields: Vec<&String> = results[0].as_object().unwrap().keys().collect();
    for col in [
        "rank",
        "theme",
        "domain",
        "k",
        "K",
        "n",
        "N",
        "p_value",
        "tfidf",
        "significant",
    ] {
        assert!(fields.iter().any(|f| *f == col), "{col}");
    }
    assert_eq!(v["query"]["n"], 8);
    assert_eq!(v["query"]["N"], 102);
    assert_eq!(v["query"]["min_K"], 1);

    let (_, again) = call_raw(&app, Method::POST, "/api/v1/enrichment", Some(query.to_string())).await;
    let (_, first) = call_raw(&app, Method::POST, "/api/v1/enrichment", Some(query.to_string())).await;
    assert_eq!(again, first);
}

#[tokio::test]
async fn enrichment_with_tfidf_method() {
    let app = app(startrek_state());
    let query = json!({"test": "klingon-tos-tas", "background": "tos-tas", "method": "tfidf", "levels": ["central", "peripheral"], "min_k": 2});
    let (status, v) = call(&app, Method::POST, "/api/v1/enrichment", Some(query)).await;
    assert_eq!(status, StatusCode::OK);
    let scores: Vec<f64> = v["results"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["tfidf"].as_f64().unwrap())
        .collect();
    assert!(scores.windows(2).all(|w| w[0] >= w[1]));
    assert!(v["results"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["K"].as_u64().unwrap() >= 2));
}

#[tokio::test]
async fn enrichment_errors() {
    let app = app(startrek_state());
    let (status, v) = call(
        &app,
        Method::POST,
        "/api/v1/enrichment",
        Some(json!({"test": "tng", "background": "tos-tas"})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(is_error(&v, "TestNotSubsetOfBackground"));

    let (status, v) = call(
        &app,
        Method::POST,
        "/api/v1/enrichment",
        Some(json!({"test": "nope", "background": "tos-tas"})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(is_error(&v, "UnknownStoryset"));

    let (status, v) = call(
        &app,
        Method::POST,
        "/api/v1/enrichment",
        Some(json!({"test": "tos", "background": "all", "alpha": 1.5})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(is_error(&v, "InvalidQuery"));

    let (status, bytes) = call_raw(&app, Method::POST, "/api/v1/enrichment", Some("{not json".into())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(is_error(&serde_json::from_slice(&bytes).unwrap(), "MalformedBody"));

    let (status, v) = call(&app, Method::POST, "/api/v1/enrichment", Some(json!({"test": "tos"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(is_error(&v, "MalformedBody"));
}

#[tokio::test]
async fn compare_reports_full_overlap() {
    let app = app(startrek_state());
    let (status, v) = call(
        &app,
        Method::POST,
        "/api/v1/compare",
        Some(json!({"test": "klingon-tos-tas", "background": "tos-tas", "top_m": 20})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["shared"], 20);

    let (status, v) = call(
        &app,
        Method::POST,
        "/api/v1/compare",
        Some(json!({"test": "klingon-tos-tas", "background": "tos-tas", "top_m": 0})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(is_error(&v, "InsufficientResults"));
}

#[tokio::test]
async fn negative_control_route() {
    let app = app(startrek_state());
    let whole = json!({"background": "tas", "n": 22, "trials": 1});
    let (status, v) = call(&app, Method::POST, "/api/v1/negative-control", Some(whole)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["mean"], 0.0);
    assert_eq!(v["counts"], json!([0]));

    let body = json!({"background": "tos-tas", "n": 8, "trials": 20, "seed": 7}).to_string();
    let (_, a) = call_raw(&app, Method::POST, "/api/v1/negative-control", Some(body.clone())).await;
    let (_, b) = call_raw(&app, Method::POST, "/api/v1/negative-control", Some(body)).await;
    assert_eq!(a, b);

    let (status, v) = call(
        &app,
        Method::POST,
        "/api/v1/negative-control",
        Some(json!({"background": "tas", "n": 5, "trials": 0})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(is_error(&v, "InvalidQuery"));

    let (status, v) = call(
        &app,
        Method::POST,
        "/api/v1/negative-control",
        Some(json!({"background": "tas", "n": 50, "trials": 3})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(is_error(&v, "SampleTooLarge"));
}

#[tokio::test]
async fn unknown_routes_and_methods() {
    let app = app(startrek_state());
    let (status, v) = call(&app, Method::GET, "/api/v2/nothing", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(is_error(&v, "NotFound"));
    let (status, v) = call(&app, Method::DELETE, "/api/v1/storysets", None).await;
    assert_eq!(status, StatusCode::METHOD_NOT_ALLOWED);
    assert!(is_error(&v, "MethodNotAllowed"));
}

#[tokio::test]
async fn cors_allows_only_configured_origins() {
    let app = app(startrek_state());
    let preflight = |origin: &'static str| {
        Request::builder()
            .method(Method::OPTIONS)
            .uri("/api/v1/enrichment")
            .header(header::ORIGIN, origin)
            .header(header::ACCESS_CONTROL_REQUEST_METHOD, "POST")
            .body(Body::empty())
            .unwrap()
    };
    let ok = app.clone().oneshot(preflight("http://explorer.test")).await.unwrap();
    assert_eq!(
        ok.headers()[header::ACCESS_CONTROL_ALLOW_ORIGIN],
        "http://explorer.test"
    );
    let denied = app.clone().oneshot(preflight("http://elsewhere.test")).await.unwrap();
    assert!(denied.headers().get(header::ACCESS_CONTROL_ALLOW_ORIGIN).is_none());
}
