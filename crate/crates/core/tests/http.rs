use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use evsearch::index::EventIndex;
use evsearch::service::{http, ingest_jsonl, Config, Engine};

const CORPUS: &str = include_str!("fixtures/corpus.jsonl");

fn app_with(config: Config) -> Router {
    let engine = Engine::new(config.build().unwrap(), EventIndex::in_memory());
    ingest_jsonl(&engine, CORPUS).unwrap();
    http::router(Arc::new(engine))
}

fn app() -> Router {
    app_with(Config::default())
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<&str>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or(Body::empty(), |b| Body::from(b.to_string())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, v)
}

#[tokio::test]
async fn empty_body_is_bad_request() {
    let app = app();
    for uri in ["/v1/extract", "/v1/search"] {
        let (status, v) = call(&app, "POST", uri, None).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{uri}");
        assert!(v["error"].as_str().unwrap().contains("empty"));
        let (status, _) = call(&app, "POST", uri, Some("{oops")).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{uri}");
    }
    let (status, _) = call(&app, "POST", "/v1/extract", Some(r#"{"language":"en","text":"  "}"#)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn unsupported_language_is_unprocessable() {
    let (status, v) = call(&app(), "POST", "/v1/extract", Some(r#"{"language":"not a tag","text":"hello"}"#)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(v["error"].as_str().unwrap().contains("not a tag"));
}

#[tokio::test]
async fn natural_language_search_echoes_the_parsed_query() {
    let (status, v) = call(&app(), "POST", "/v1/search", Some(r#"{"nl":"anti-inflation protests in Vietnam"}"#)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["query"]["event_types"], json!(["Protest"]));
    assert_eq!(v["query"]["location"], "Vietnam");
    assert_eq!(v["query"]["context"], "anti-inflation");
    assert_eq!(v["hits"][0]["event"]["doc_id"], "es-hanoi");
    assert!(v["providers"].as_object().is_some_and(|p| !p.is_empty()));
}

#[tokio::test]
async fn structured_search_and_empty_results() {
    let app = app();
    let (status, v) = call(&app, "POST", "/v1/search", Some(r#"{"types":["Disease-Outbreak"],"location":"Iran","k":1}"#)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["hits"].as_array().unwrap().len(), 1);
    assert_eq!(v["hits"][0]["event"]["event_id"], "en-tehran/s0.e0");

    let (status, v) = call(&app, "POST", "/v1/search", Some(r#"{"types":["Sanction"]}"#)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["hits"], json!([]));

    let (status, _) = call(&app, "POST", "/v1/search", Some(r#"{"types":["Picnic"]}"#)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn documents_and_unknown_ids() {
    let app = app();
    let (status, v) = call(&app, "GET", "/v1/documents/fr-merkel", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["document"]["language"], "fr");
    assert_eq!(v["translation_status"], "done");

    let (status, v) = call(&app, "GET", "/v1/documents/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(v["error"].as_str().unwrap().contains("nope"));
    let (status, _) = call(&app, "GET", "/v1/documents/nope/summary", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, "GET", "/v1/extract/job-999/translation", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn summary_lists_options_and_highlights_selection() {
    let app = app();
    let (status, v) = call(&app, "GET", "/v1/documents/en-tehran/summary", None).await;
    assert_eq!(status, StatusCode::OK);
    let cats: Vec<&str> = v["options"]["categories"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    assert!(cats.contains(&"Health") && cats.contains(&"Crime"), "{cats:?}");
    assert_eq!(v["highlights"], json!([]));

    let (status, v) = call(&app, "GET", "/v1/documents/en-tehran/summary?select=category:Health", None).await;
    assert_eq!(status, StatusCode::OK);
    let hl = v["highlights"].as_array().unwrap();
    assert_eq!(hl.len(), 1);
    assert_eq!(hl[0]["event_id"], "s0.e0");

    let (status, _) = call(&app, "GET", "/v1/documents/en-tehran/summary?select=category:Sports", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

async fn wait_for_translation(app: &Router, job: &str) -> Value {
    for _ in 0..200 {
        let (status, v) = call(app, "GET", &format!("/v1/extract/{job}/translation"), None).await;
        assert_eq!(status, StatusCode::OK);
        if v["translation_status"] != "pending" {
            return v;
        }
        tokio::time::sleep(Duration::from_millis(25)).await;
    }
    panic!("translation of {job} never finished");
}

#[tokio::test]
async fn extract_returns_pending_then_translation() {
    let app = app();
    let body = r#"{"id":"pl1","language":"pl","text":"UE wycofuje się z kupowania rosyjskiej ropy."}"#;
    let (status, v) = call(&app, "POST", "/v1/extract", Some(body)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["translation_status"], "pending");
    assert_eq!(v["document"]["id"], "pl1");
    let types: Vec<&str> = v["sentences"][0]["events"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["event_type"].as_str().unwrap())
        .collect();
    assert_eq!(types, ["Withdraw", "Transaction"]);

    let done = wait_for_translation(&app, v["job"].as_str().unwrap()).await;
    assert_eq!(done["translation_status"], "done");
    let projections = done["sentences"][0]["translation"]["projections"].as_array().unwrap();
    let anchor = projections.iter().find(|p| p["element"] == "anchor" && p["source"]["text"] == "wycofuje").unwrap();
    assert_eq!(anchor["target"]["text"], "withdraws");
}

#[tokio::test]
async fn identity_translation_projects_onto_the_same_spans() {
    let config = Config::parse(
        "[providers]\ntranslation = \"identity\"\nembeddings = \"hashed\"\n",
        Path::new("."),
    )
    .unwrap();
    let app = app_with(config);
    let body = r#"{"language":"en","text":"A cholera outbreak spread in Tehran last month. Police arrested students who protested in Tehran yesterday."}"#;
    let (_, v) = call(&app, "POST", "/v1/extract", Some(body)).await;
    let done = wait_for_translation(&app, v["job"].as_str().unwrap()).await;
    let mut checked = 0;
    for s in done["sentences"].as_array().unwrap() {
        assert_eq!(s["translation"]["text"], s["text"]);
        for p in s["translation"]["projections"].as_array().unwrap() {
            let (src, tgt) = (&p["source"], &p["target"]);
            assert_eq!(tgt["text"], src["text"], "{p}");
            assert_eq!(tgt["start"], src["start"], "{p}");
            assert_eq!(tgt["end"], src["end"], "{p}");
            checked += 1;
        }
    }
    assert!(checked >= 6, "only {checked} projections");
}

#[tokio::test]
async fn healthz_reports_counts() {
    let (status, v) = call(&app(), "GET", "/v1/healthz", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["documents"], 3);
}
