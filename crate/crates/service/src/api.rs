//! Routes, request decoding and error mapping.

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, RawQuery, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use hotpie_core::analysis::{gap_report, merge_coverage, select_views, stale_report, suggest_paths};
use hotpie_core::io::{export_dot, render_report, DotOptions};
use hotpie_core::model::{LifecyclePhase, ModelError};
use hotpie_core::{AnalysisError, ReferenceCatalog, RepresentationLevel, ViewProfile};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::store::{EvidenceRequest, Mutation, ObjectRequest, PathRequest, PhaseRequest, ProjectStore, StoreError};

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<ProjectStore>,
    pub catalog: Arc<ReferenceCatalog>,
    pub profiles: Arc<Vec<ViewProfile>>,
}

/// JSON error body `{error, message}`, plus `current_version` on conflicts.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub name: &'static str,
    pub message: String,
    pub current_version: Option<u64>,
}

impl ApiError {
    fn new(status: StatusCode, name: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            name,
            message: message.into(),
            current_version: None,
        }
    }

    fn bad_request(name: &'static str, message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, name, message)
    }
}

fn model_status(e: &ModelError) -> StatusCode {
    match e {
        ModelError::UnknownPath(_) => StatusCode::NOT_FOUND,
        ModelError::EmptyName | ModelError::UnknownObject(_) | ModelError::FactorMismatch { .. } => {
            StatusCode::BAD_REQUEST
        }
        ModelError::SelfLoop(_)
        | ModelError::InvalidInitial
        | ModelError::PhaseRegression { .. }
        | ModelError::FuturePhase { .. }
        | ModelError::ObjectInUse(_) => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let status = match &e {
            StoreError::UnknownProject(_) => StatusCode::NOT_FOUND,
            StoreError::ProjectExists(_) | StoreError::VersionConflict { .. } => StatusCode::CONFLICT,
            StoreError::InvalidProjectId(_) | StoreError::UnknownExample(_) => StatusCode::BAD_REQUEST,
            StoreError::Model(m) => model_status(m),
            StoreError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let current_version = match &e {
            StoreError::VersionConflict { current, .. } => Some(*current),
            _ => None,
        };
        ApiError {
            status,
            name: e.name(),
            message: e.to_string(),
            current_version,
        }
    }
}

impl From<ModelError> for ApiError {
    fn from(e: ModelError) -> Self {
        StoreError::Model(e).into()
    }
}

impl From<AnalysisError> for ApiError {
    fn from(e: AnalysisError) -> Self {
        ApiError::bad_request(e.name(), e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.name, "message": self.message });
        if let Some(v) = self.current_version {
            body["current_version"] = json!(v);
        }
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T = Response> = Result<T, ApiError>;

fn etag(version: u64) -> HeaderValue {
    HeaderValue::from_str(&format!("\"{version}\"")).expect("digits are a valid header value")
}

fn versioned(status: StatusCode, version: u64, body: Value) -> Response {
    let mut resp = (status, Json(body)).into_response();
    resp.headers_mut().insert(header::ETAG, etag(version));
    resp
}

fn decode<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request("MalformedRequest", e.to_string()))
}

fn query<T: DeserializeOwned>(raw: Option<String>) -> ApiResult<T> {
    let raw = raw.unwrap_or_default();
    Query::<T>::try_from_uri(&format!("/?{raw}").parse().expect("query string forms a valid uri"))
        .map(|Query(q)| q)
        .map_err(|e| ApiError::bad_request("MalformedQuery", e.body_text()))
}

/// Parses `If-Match: <version>`, accepting quoted and weak forms.
pub fn if_match(headers: &HeaderMap) -> ApiResult<u64> {
    let raw = headers
        .get(header::IF_MATCH)
        .ok_or_else(|| ApiError::bad_request("MissingIfMatch", "mutations require an If-Match: <version> header"))?;
    let text = raw.to_str().unwrap_or_default().trim();
    let text = text.strip_prefix("W/").unwrap_or(text).trim_matches('"');
    text.parse()
        .map_err(|_| ApiError::bad_request("InvalidIfMatch", format!("If-Match must be a version number, got '{text}'")))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/projects", get(list_projects).post(create_project))
        .route("/projects/{id}", get(get_project))
        .route("/projects/{id}/objects", post(add_object))
        .route("/projects/{id}/paths", post(add_path))
        .route("/projects/{id}/paths/{pid}/evidence", post(record_evidence))
        .route("/projects/{id}/phase", post(advance_phase))
        .route("/projects/{id}/suggest", get(suggest))
        .route("/projects/{id}/coverage", get(coverage))
        .route("/projects/{id}/gaps", get(gaps))
        .route("/projects/{id}/stale", get(stale))
        .route("/projects/{id}/report", get(report))
        .route("/projects/{id}/diagram", get(diagram))
        .route("/catalog", get(catalog))
        .route("/catalog/search", get(catalog_search))
        .route("/profiles", get(profiles))
        .with_state(state)
}

async fn list_projects(State(st): State<AppState>) -> Json<Value> {
    Json(json!({ "projects": st.store.list().await }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateProject {
    id: String,
    #[serde(default)]
    name: String,
    #[serde(default)]
    example: Option<String>,
    #[serde(default)]
    author: String,
}

async fn create_project(State(st): State<AppState>, body: Bytes) -> ApiResult {
    let req: CreateProject = decode(&body)?;
    let snap = st.store.create(&req.id, &req.name, req.example.as_deref(), &req.author)?;
    Ok(versioned(
        StatusCode::CREATED,
        snap.version,
        json!({ "version": snap.version, "project": *snap.project }),
    ))
}

async fn get_project(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let snap = st.store.get(&id).await?;
    Ok(versioned(
        StatusCode::OK,
        snap.version,
        json!({ "version": snap.version, "project": *snap.project }),
    ))
}

async fn mutate(st: &AppState, id: &str, headers: &HeaderMap, status: StatusCode, m: Mutation) -> ApiResult {
    let expected = if_match(headers)?;
    let accepted = st.store.mutate(id, expected, &m).await?;
    let version = accepted.version;
    Ok(versioned(status, version, serde_json::to_value(accepted).expect("serializable")))
}

async fn add_object(State(st): State<AppState>, Path(id): Path<String>, headers: HeaderMap, body: Bytes) -> ApiResult {
    let req: ObjectRequest = decode(&body)?;
    mutate(&st, &id, &headers, StatusCode::CREATED, Mutation::AddObject(req)).await
}

async fn add_path(State(st): State<AppState>, Path(id): Path<String>, headers: HeaderMap, body: Bytes) -> ApiResult {
    let req: PathRequest = decode(&body)?;
    let unknown: Vec<String> = st
        .catalog
        .unknown_keywords(&req.keywords)
        .into_iter()
        .map(str::to_string)
        .collect();
    let mut resp = mutate(&st, &id, &headers, StatusCode::CREATED, Mutation::AddPath(req)).await?;
    if !unknown.is_empty() {
        let value = HeaderValue::from_str(&unknown.join(", ")).unwrap_or(HeaderValue::from_static("non-ascii"));
        resp.headers_mut().insert("x-unknown-keywords", value);
    }
    Ok(resp)
}

async fn record_evidence(
    State(st): State<AppState>,
    Path((id, pid)): Path<(String, String)>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult {
    let evidence: EvidenceRequest = decode(&body)?;
    let m = Mutation::RecordEvidence { path_id: pid, evidence };
    mutate(&st, &id, &headers, StatusCode::CREATED, m).await
}

async fn advance_phase(State(st): State<AppState>, Path(id): Path<String>, headers: HeaderMap, body: Bytes) -> ApiResult {
    let req: PhaseRequest = decode(&body)?;
    mutate(&st, &id, &headers, StatusCode::OK, Mutation::AdvancePhase(req)).await
}

#[derive(Deserialize)]
struct SuggestQuery {
    source: String,
    target: String,
    #[serde(default)]
    uncovered_only: bool,
}

async fn suggest(State(st): State<AppState>, Path(id): Path<String>, RawQuery(raw): RawQuery) -> ApiResult {
    let q: SuggestQuery = query(raw)?;
    let snap = st.store.get(&id).await?;
    let p = &snap.project;
    let source = p.resolve_object(&q.source)?.id.clone();
    let target = p.resolve_object(&q.target)?.id.clone();
    let prompts = suggest_paths(p, &st.catalog, source.as_str(), target.as_str(), !q.uncovered_only)?;
    Ok(versioned(
        StatusCode::OK,
        snap.version,
        json!({ "version": snap.version, "prompts": prompts }),
    ))
}

#[derive(Deserialize)]
struct ViewsQuery {
    #[serde(default)]
    views: Option<String>,
    #[serde(default)]
    threshold: Option<String>,
}

impl ViewsQuery {
    fn selected(&self, profiles: &[ViewProfile]) -> ApiResult<Vec<ViewProfile>> {
        let ids: Vec<&str> = self
            .views
            .as_deref()
            .unwrap_or_default()
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect();
        Ok(select_views(profiles, &ids)?)
    }

    fn threshold(&self) -> ApiResult<RepresentationLevel> {
        match &self.threshold {
            None => Ok(RepresentationLevel::Represented),
            Some(t) => t
                .parse()
                .map_err(|e: String| ApiError::bad_request("MalformedQuery", e)),
        }
    }
}

async fn coverage(State(st): State<AppState>, Path(id): Path<String>, RawQuery(raw): RawQuery) -> ApiResult {
    let q: ViewsQuery = query(raw)?;
    let snap = st.store.get(&id).await?;
    let matrix = merge_coverage(&q.selected(&st.profiles)?)?;
    Ok(versioned(
        StatusCode::OK,
        snap.version,
        json!({ "version": snap.version, "coverage": matrix }),
    ))
}

async fn gaps(State(st): State<AppState>, Path(id): Path<String>, RawQuery(raw): RawQuery) -> ApiResult {
    let q: ViewsQuery = query(raw)?;
    let snap = st.store.get(&id).await?;
    let threshold = q.threshold()?;
    let gaps: Vec<Value> = gap_report(&q.selected(&st.profiles)?, threshold)
        .into_iter()
        .map(|(f, l)| json!({ "factor": f, "level": l }))
        .collect();
    Ok(versioned(
        StatusCode::OK,
        snap.version,
        json!({ "version": snap.version, "threshold": threshold, "gaps": gaps }),
    ))
}

#[derive(Deserialize)]
struct StaleQuery {
    #[serde(default)]
    as_of: Option<LifecyclePhase>,
}

async fn stale(State(st): State<AppState>, Path(id): Path<String>, RawQuery(raw): RawQuery) -> ApiResult {
    let q: StaleQuery = query(raw)?;
    let snap = st.store.get(&id).await?;
    let as_of = q.as_of.unwrap_or(snap.project.current_phase());
    let paths = stale_report(&snap.project, as_of);
    Ok(versioned(
        StatusCode::OK,
        snap.version,
        json!({ "version": snap.version, "as_of": as_of, "paths": paths }),
    ))
}

async fn report(State(st): State<AppState>, Path(id): Path<String>, RawQuery(raw): RawQuery) -> ApiResult {
    let q: ViewsQuery = query(raw)?;
    let snap = st.store.get(&id).await?;
    let selected = match q.views {
        Some(_) => Some(q.selected(&st.profiles)?),
        None => None,
    };
    let markdown = render_report(&snap.project, selected.as_deref());
    Ok(versioned(
        StatusCode::OK,
        snap.version,
        json!({ "version": snap.version, "markdown": markdown }),
    ))
}

#[derive(Deserialize)]
struct DiagramQuery {
    #[serde(default)]
    show_discharged: bool,
}

async fn diagram(State(st): State<AppState>, Path(id): Path<String>, RawQuery(raw): RawQuery) -> ApiResult {
    let q: DiagramQuery = query(raw)?;
    let snap = st.store.get(&id).await?;
    let dot = export_dot(
        &snap.project,
        DotOptions {
            show_discharged: q.show_discharged,
        },
    );
    let mut resp = ([(header::CONTENT_TYPE, "text/vnd.graphviz; charset=utf-8")], dot).into_response();
    resp.headers_mut().insert(header::ETAG, etag(snap.version));
    Ok(resp)
}

async fn catalog(State(st): State<AppState>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], st.catalog.to_json()).into_response()
}

async fn catalog_search(State(st): State<AppState>, RawQuery(raw): RawQuery) -> ApiResult<Json<Value>> {
    let q: BTreeMap<String, String> = query(raw)?;
    let needle = q.get("q").map(String::as_str).unwrap_or_default();
    Ok(Json(json!({ "query": needle, "templates": st.catalog.search(needle) })))
}

async fn profiles(State(st): State<AppState>) -> Json<Value> {
    Json(json!({ "profiles": *st.profiles }))
}
