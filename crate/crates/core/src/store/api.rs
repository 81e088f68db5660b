//! JSON-over-HTTP curation service.
//!
//! Every mutation is applied to a copy of the state, validated, persisted
//! and only then published, so readers never observe a half-applied change.
//! Responses carry the state `revision`; concurrent writers are serialized
//! and the last one wins.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{save_path, stats, ProjectState, Verdict, DEFAULT_SAMPLE_SIZE};
use crate::error::Error;
use crate::induction::{Template, TemplateStatus};

pub struct ApiState {
    state: RwLock<ProjectState>,
    writer: Mutex<()>,
    path: Option<PathBuf>,
}

impl ApiState {
    /// `path`, when given, receives the project after every mutation.
    pub fn new(state: ProjectState, path: Option<PathBuf>) -> Arc<Self> {
        Arc::new(ApiState { state: RwLock::new(state), writer: Mutex::new(()), path })
    }

    pub fn snapshot(&self) -> ProjectState {
        self.state.read().expect("state lock").clone()
    }

    fn read<T>(&self, f: impl FnOnce(&ProjectState) -> T) -> T {
        f(&self.state.read().expect("state lock"))
    }

    fn mutate<T>(&self, f: impl FnOnce(&mut ProjectState) -> Result<T, Error>) -> Result<(T, u64), ApiError> {
        let _guard = self.writer.lock().expect("writer lock");
        let mut next = self.snapshot();
        let out = f(&mut next).map_err(ApiError::from)?;
        next.validate().map_err(ApiError::from)?;
        if let Some(path) = &self.path {
            save_path(&next, path).map_err(ApiError::from)?;
        }
        let revision = next.revision;
        *self.state.write().expect("state lock") = next;
        Ok((out, revision))
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into() }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let (status, code) = match &e {
            Error::UnknownTemplate(_) => (StatusCode::NOT_FOUND, "unknown_template"),
            Error::MissingRoles(_) => (StatusCode::CONFLICT, "missing_roles"),
            Error::BadRoles(_) => (StatusCode::UNPROCESSABLE_ENTITY, "bad_roles"),
            Error::WrongIteration { .. } => (StatusCode::CONFLICT, "wrong_iteration"),
            Error::InvalidArgument(_) => (StatusCode::BAD_REQUEST, "invalid_argument"),
            Error::Integrity(_) => (StatusCode::CONFLICT, "integrity"),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": self.code, "message": self.message });
        (self.status, Json(body)).into_response()
    }
}

type ApiResult = Result<Json<Value>, ApiError>;

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct TemplateView<'a> {
    id: &'a str,
    event_type: &'a str,
    rendering: String,
    types: [String; 3],
    verb: &'a str,
    connector: &'a [String],
    status: TemplateStatus,
    roles: Option<&'a [String; 3]>,
    support: usize,
    iteration: u32,
    parent: Option<&'a str>,
}

impl<'a> From<&'a Template> for TemplateView<'a> {
    fn from(t: &'a Template) -> Self {
        TemplateView {
            id: &t.id,
            event_type: &t.event_type,
            rendering: t.key.to_string(),
            types: t.key.types.clone().map(|ty| ty.to_string()),
            verb: &t.key.verb,
            connector: &t.key.connector,
            status: t.status,
            roles: t.roles.as_ref(),
            support: t.support_count(),
            iteration: t.iteration,
            parent: t.parent.as_deref(),
        }
    }
}

fn view(t: &Template) -> Value {
    serde_json::to_value(TemplateView::from(t)).expect("template view serializes")
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct TemplateFilter {
    status: Option<String>,
    iteration: Option<u32>,
    event_type: Option<String>,
}

async fn list_templates(State(api): State<Arc<ApiState>>, Query(filter): Query<TemplateFilter>) -> ApiResult {
    let status = filter.status.as_deref().map(str::parse::<TemplateStatus>).transpose()?;
    Ok(Json(api.read(|s| {
        let templates: Vec<Value> = s
            .templates
            .iter()
            .filter(|t| status.is_none_or(|st| t.status == st))
            .filter(|t| filter.iteration.is_none_or(|i| t.iteration == i))
            .filter(|t| filter.event_type.as_deref().is_none_or(|e| t.event_type == e))
            .map(view)
            .collect();
        json!({ "revision": s.revision, "templates": templates })
    })))
}

async fn get_template(State(api): State<Arc<ApiState>>, Path(id): Path<String>) -> ApiResult {
    api.read(|s| {
        let t = s.template(&id).ok_or(Error::UnknownTemplate(id.clone()))?;
        let tuples: Vec<Value> = t
            .support_tuples
            .iter()
            .map(|tu| {
                json!({
                    "docId": tu.provenance.doc_id,
                    "sentIndex": tu.provenance.sent_index,
                    "args": [tu.n1.norm, tu.n2.norm, tu.n3.norm],
                    "context": tu.context(),
                })
            })
            .collect();
        Ok(Json(json!({
            "revision": s.revision,
            "template": view(t),
            "supportingTuples": tuples,
        })))
    })
}

#[derive(Deserialize)]
struct StatusBody {
    status: String,
}

async fn set_status(
    State(api): State<Arc<ApiState>>,
    Path(id): Path<String>,
    Json(body): Json<StatusBody>,
) -> ApiResult {
    let status: TemplateStatus = body.status.parse()?;
    let (template, revision) = api.mutate(|s| s.set_status(&id, status).map(view))?;
    Ok(Json(json!({ "revision": revision, "template": template })))
}

#[derive(Deserialize)]
struct RolesBody {
    roles: [String; 3],
}

async fn set_roles(
    State(api): State<Arc<ApiState>>,
    Path(id): Path<String>,
    Json(body): Json<RolesBody>,
) -> ApiResult {
    let (template, revision) = api.mutate(|s| s.set_role_labels(&id, body.roles).map(view))?;
    Ok(Json(json!({ "revision": revision, "template": template })))
}

async fn list_relations(State(api): State<Arc<ApiState>>) -> ApiResult {
    Ok(Json(api.read(|s| {
        let mut instance_counts: BTreeMap<String, usize> = BTreeMap::new();
        for inst in &s.instances {
            *instance_counts.entry(inst.relation.name()).or_default() += 1;
        }
        let relations: Vec<Value> = s
            .relations
            .iter()
            .map(|r| {
                let templates = s
                    .templates
                    .iter()
                    .filter(|t| t.is_accepted() && t.relation().as_ref() == Some(r))
                    .count();
                json!({
                    "name": r.name(),
                    "eventType": r.event_type,
                    "roles": r.roles,
                    "acceptedTemplates": templates,
                    "instances": instance_counts.get(&r.name()).copied().unwrap_or(0),
                })
            })
            .collect();
        json!({ "revision": s.revision, "relations": relations })
    })))
}

#[derive(Deserialize)]
struct InstanceFilter {
    relation: Option<String>,
}

async fn list_instances(State(api): State<Arc<ApiState>>, Query(filter): Query<InstanceFilter>) -> ApiResult {
    Ok(Json(api.read(|s| {
        let instances: Vec<Value> = s
            .instances
            .iter()
            .filter(|i| filter.relation.as_deref().is_none_or(|r| i.relation.name() == r))
            .map(|i| {
                json!({
                    "relation": i.relation.name(),
                    "roles": i.relation.roles,
                    "args": [i.args.0, i.args.1, i.args.2],
                    "rawArgs": i.raw_args,
                    "templateId": i.template_id,
                    "docId": i.doc_id,
                    "sentIndex": i.sent_index,
                    "iteration": i.iteration,
                })
            })
            .collect();
        json!({ "revision": s.revision, "instances": instances })
    })))
}

#[derive(Deserialize)]
struct SampleQuery {
    iteration: u32,
    n: Option<usize>,
    seed: Option<u64>,
}

async fn sample(State(api): State<Arc<ApiState>>, Query(q): Query<SampleQuery>) -> ApiResult {
    let n = q.n.unwrap_or(DEFAULT_SAMPLE_SIZE);
    if n == 0 {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "invalid_argument", "n must be at least 1"));
    }
    Ok(Json(api.read(|s| {
        let templates: Vec<Value> =
            s.sample_for_review(q.iteration, n, q.seed.unwrap_or(0)).into_iter().map(view).collect();
        json!({ "revision": s.revision, "iteration": q.iteration, "templates": templates })
    })))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct JudgmentBody {
    template_id: String,
    verdict: Verdict,
    iteration: u32,
    #[serde(default)]
    note: String,
}

async fn record_judgment(State(api): State<Arc<ApiState>>, Json(body): Json<JudgmentBody>) -> ApiResult {
    let (precision, revision) = api.mutate(|s| {
        s.record_judgment(&body.template_id, body.verdict, body.iteration, &body.note)?;
        Ok(s.precision(body.iteration))
    })?;
    Ok(Json(json!({
        "revision": revision,
        "iteration": body.iteration,
        "judged": precision.map_or(0, |p| p.judged),
        "correct": precision.map_or(0, |p| p.correct),
        "precision": precision.map(|p| p.ratio()),
    })))
}

async fn get_stats(State(api): State<Arc<ApiState>>) -> ApiResult {
    Ok(Json(api.read(|s| {
        let mut v = serde_json::to_value(stats(s)).expect("stats serialize");
        v["revision"] = json!(s.revision);
        v
    })))
}

async fn list_events(State(api): State<Arc<ApiState>>) -> ApiResult {
    Ok(Json(api.read(|s| json!({ "revision": s.revision, "events": s.events }))))
}

pub fn router(api: Arc<ApiState>) -> Router {
    Router::new()
        .route("/templates", get(list_templates))
        .route("/templates/{id}", get(get_template))
        .route("/templates/{id}/status", post(set_status))
        .route("/templates/{id}/roles", post(set_roles))
        .route("/relations", get(list_relations))
        .route("/instances", get(list_instances))
        .route("/sample", get(sample))
        .route("/judgments", post(record_judgment))
        .route("/stats", get(get_stats))
        .route("/events", get(list_events))
        .with_state(api)
}

/// Binds `addr` and serves until the task is dropped.
pub async fn serve(api: Arc<ApiState>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(api)).await
}
