use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use chrono::{TimeZone, Utc};
use http_body_util::BodyExt;
use hotpie_core::io::load_project_file;
use hotpie_service::{router, AppState, Clock, ProjectStore};
use serde_json::{json, Value};
use tower::ServiceExt;

fn fixed_clock() -> Clock {
    Arc::new(|| Utc.with_ymd_and_hms(2017, 1, 10, 9, 0, 0).unwrap())
}

fn app(dir: &std::path::Path) -> (Router, AppState) {
    let state = AppState {
        store: Arc::new(ProjectStore::open(dir, fixed_clock()).unwrap()),
        catalog: Arc::new(hotpie_core::taxonomy::default_catalog().clone()),
        profiles: Arc::new(hotpie_core::analysis::modaf_profiles().to_vec()),
    };
    (router(state.clone()), state)
}

async fn call(app: &Router, method: &str, uri: &str, if_match: Option<u64>, body: Option<Value>) -> (StatusCode, Value) {
    let (status, _, bytes) = call_raw(app, method, uri, if_match, body).await;
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

async fn call_raw(
    app: &Router,
    method: &str,
    uri: &str,
    if_match: Option<u64>,
    body: Option<Value>,
) -> (StatusCode, axum::http::HeaderMap, Vec<u8>) {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(v) = if_match {
        req = req.header(header::IF_MATCH, format!("\"{v}\""));
    }
    let req = match body {
        Some(b) => req
            .header(header::CONTENT_TYPE, "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, headers, bytes)
}

async fn arp(app: &Router) {
    let (s, body) = call(app, "POST", "/projects", None, Some(json!({"id": "arp", "example": "arp4761"}))).await;
    assert_eq!(s, StatusCode::CREATED, "{body}");
    assert_eq!(body["version"], 0);
}

#[tokio::test]
async fn create_list_and_get() {
    let dir = tempfile::tempdir().unwrap();
    let (app, _) = app(dir.path());
    arp(&app).await;
    let (s, body) = call(&app, "POST", "/projects", None, Some(json!({"id": "blank", "name": "Blank"}))).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(body["project"]["objects"], json!([]));

    let (s, body) = call(&app, "GET", "/projects", None, None).await;
    assert_eq!(s, StatusCode::OK);
    let ids: Vec<_> = body["projects"].as_array().unwrap().iter().map(|p| p["id"].clone()).collect();
    assert_eq!(ids, vec![json!("arp"), json!("blank")]);

    let (s, headers, bytes) = call_raw(&app, "GET", "/projects/arp", None, None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(headers[header::ETAG], "\"0\"");
    let body: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(body["project"]["paths"].as_array().unwrap().len(), 3);

    let (s, body) = call(&app, "GET", "/projects/missing", None, None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(body["error"], "UnknownProject");

    let (s, body) = call(&app, "POST", "/projects", None, Some(json!({"id": "arp", "name": "again"}))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(body["error"], "ProjectExists");

    let (s, body) = call(&app, "POST", "/projects", None, Some(json!({"id": "../x", "name": "bad"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "InvalidProjectId");
}

#[tokio::test]
async fn suggest_aircrew_runway_gives_36_prompts() {
    let dir = tempfile::tempdir().unwrap();
    let (app, _) = app(dir.path());
    arp(&app).await;
    let (s, body) = call(&app, "GET", "/projects/arp/suggest?source=aircrew&target=runway", None, None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body["version"], 0);
    let prompts = body["prompts"].as_array().unwrap();
    assert_eq!(prompts.len(), 36);
    assert!(prompts.iter().all(|p| p["covered"] == false));

    let (s, body) = call(&app, "GET", "/projects/arp/suggest?source=aircrew&target=aircrew", None, None).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "SelfLoop");

    let (s, body) = call(&app, "GET", "/projects/arp/suggest?source=aircrew", None, None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "MalformedQuery");
}

#[tokio::test]
async fn mutations_require_current_version() {
    let dir = tempfile::tempdir().unwrap();
    let (app, _) = app(dir.path());
    arp(&app).await;
    let obj = json!({"name": "Air traffic control"});

    let (s, body) = call(&app, "POST", "/projects/arp/objects", None, Some(obj.clone())).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "MissingIfMatch");

    let (s, body) = call(&app, "POST", "/projects/arp/objects", Some(0), Some(obj.clone())).await;
    assert_eq!(s, StatusCode::CREATED, "{body}");
    assert_eq!(body["version"], 1);
    assert_eq!(body["object"]["id"], "air-traffic-control");

    let (s, body) = call(&app, "POST", "/projects/arp/objects", Some(0), Some(obj)).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(body["error"], "VersionConflict");
    assert_eq!(body["current_version"], 1);
}

#[tokio::test]
async fn domain_errors_map_to_status_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (app, _) = app(dir.path());
    arp(&app).await;

    let self_loop = json!({
        "source": {"object": "aircrew", "primary": "Human"},
        "target": {"object": "aircrew", "primary": "Human"},
        "initial": "Plausible",
    });
    let (s, body) = call(&app, "POST", "/projects/arp/paths", Some(0), Some(self_loop)).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "SelfLoop");

    let (s, body) = call(&app, "POST", "/projects/arp/objects", Some(0), Some(json!({"name": ""}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "EmptyName");

    let ev = json!({"text": "x", "resulting": "Discharged"});
    let (s, body) = call(&app, "POST", "/projects/arp/paths/nonexistent/evidence", Some(0), Some(ev)).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(body["error"], "UnknownPath");

    let (s, body) = call(&app, "POST", "/projects/arp/phase", Some(0), Some(json!({"phase": "Design"}))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "PhaseRegression");

    let (s, body) = call(&app, "POST", "/projects/arp/objects", Some(0), Some(json!({"nam": "typo"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "MalformedRequest");

    // rejected requests never advance the version
    let (_, body) = call(&app, "GET", "/projects/arp", None, None).await;
    assert_eq!(body["version"], 0);
}

#[tokio::test]
async fn evidence_discharges_cp3_and_persists() {
    let dir = tempfile::tempdir().unwrap();
    let (app, state) = app(dir.path());
    arp(&app).await;
    let ev = json!({
        "text": "ground crews follow the runway safety programme",
        "resulting": "Discharged",
        "author": "safety lead",
    });
    let (s, body) = call(&app, "POST", "/projects/arp/paths/CP3/evidence", Some(0), Some(ev)).await;
    assert_eq!(s, StatusCode::CREATED, "{body}");
    assert_eq!(body["path"]["classification"], "Discharged");
    assert_eq!(body["path"]["evidence"].as_array().unwrap().len(), 1);

    let stored = load_project_file(&dir.path().join("arp.json")).unwrap();
    assert_eq!(&stored, &*state.store.get("arp").await.unwrap().project);
    assert_eq!(std::fs::read_to_string(dir.path().join("arp.version")).unwrap().trim(), "1");

    // a fresh store over the same directory resumes at the same version
    let (reopened, _) = self::app(dir.path());
    let (_, body) = call(&reopened, "GET", "/projects/arp", None, None).await;
    assert_eq!(body["version"], 1);

    let (_, headers, bytes) = call_raw(&app, "GET", "/projects/arp/diagram", None, None).await;
    assert_eq!(headers[header::CONTENT_TYPE], "text/vnd.graphviz; charset=utf-8");
    assert_eq!(headers[header::ETAG], "\"1\"");
    let dot = String::from_utf8(bytes).unwrap();
    assert_eq!(dot.matches(" -> ").count(), 2);
    let (_, _, bytes) = call_raw(&app, "GET", "/projects/arp/diagram?show_discharged=true", None, None).await;
    assert_eq!(String::from_utf8(bytes).unwrap().matches(" -> ").count(), 3);
}

#[tokio::test]
async fn analysis_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let (app, _) = app(dir.path());
    arp(&app).await;

    let (s, body) = call(&app, "GET", "/projects/arp/coverage?views=SV-1", None, None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(
        body["coverage"]["merged"],
        json!({"Human": "P", "Organisation": "R", "Technology": "R", "Process": "P", "Information": "R", "Environment": "N"})
    );

    let (_, body) = call(&app, "GET", "/projects/arp/gaps", None, None).await;
    assert_eq!(
        body["gaps"],
        json!([{"factor": "Human", "level": "P"}, {"factor": "Environment", "level": "P"}])
    );

    let (s, body) = call(&app, "GET", "/projects/arp/gaps?views=SV-99", None, None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "UnknownView");

    let (_, body) = call(&app, "GET", "/projects/arp/stale?as_of=Validation", None, None).await;
    assert_eq!(body["paths"].as_array().unwrap().len(), 1);
    assert_eq!(body["paths"][0]["id"], "CP3");

    let (_, body) = call(&app, "GET", "/projects/arp/report?views=SV-4", None, None).await;
    let md = body["markdown"].as_str().unwrap();
    assert!(md.contains("## Open uncertainties"));
    assert!(md.contains("## Coverage gaps"));

    let (_, body) = call(&app, "GET", "/catalog/search?q=training", None, None).await;
    assert!(body["templates"].as_array().unwrap().iter().any(|t| t["keyword"] == "training"));

    let (s, _, bytes) = call_raw(&app, "GET", "/catalog", None, None).await;
    assert_eq!(s, StatusCode::OK);
    let cat = hotpie_core::ReferenceCatalog::from_json(std::str::from_utf8(&bytes).unwrap()).unwrap();
    assert_eq!(cat.templates().len(), 274);
}

#[tokio::test]
async fn concurrent_writers_with_same_version() {
    let dir = tempfile::tempdir().unwrap();
    let (app, _) = app(dir.path());
    arp(&app).await;
    let a = tokio::spawn({
        let app = app.clone();
        async move { call(&app, "POST", "/projects/arp/objects", Some(0), Some(json!({"name": "a"}))).await }
    });
    let b = tokio::spawn({
        let app = app.clone();
        async move { call(&app, "POST", "/projects/arp/objects", Some(0), Some(json!({"name": "b"}))).await }
    });
    let mut statuses = vec![a.await.unwrap().0, b.await.unwrap().0];
    statuses.sort();
    assert_eq!(statuses, vec![StatusCode::CREATED, StatusCode::CONFLICT]);
}
