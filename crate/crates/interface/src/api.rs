//! JSON-over-HTTP service.
//!
//! | method | path                     | body                                          |
//! |--------|--------------------------|-----------------------------------------------|
//! | GET    | `/api/presets`           |                                               |
//! | POST   | `/api/population`        | CSV (`text/csv`) or `{"csv": ...}` / `{"synthesis": {...}}` |
//! | GET    | `/api/population/{id}`   |                                               |
//! | POST   | `/api/evaluate`          | `{population_id, policy}`                     |
//! | POST   | `/api/household/whatif`  | `{household, policy}`                         |
//! | POST   | `/api/compare`           | `{population_id, policies}`                   |
//! | POST   | `/api/sweep`             | `{population_id, policy, parameter, values}`  |
//! | POST   | `/api/solve`             | `{population_id, policy, target_bgn, tolerance_bgn?}` |
//!
//! A `policy` is either a preset name or a full policy object. Errors are
//! `{"code": ..., "message": ...}` with status 400 (invalid input), 404
//! (unknown population) or 422 (solver could not meet the target).
//! Populations live in memory only and are lost on restart.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::rejection::JsonRejection;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use taxsim_core::household::HouseholdBreakdown;
use taxsim_core::lab::{self, Comparison, SweepPoint};
use taxsim_core::population::PopulationSummary;
use taxsim_core::{
    evaluate, household_breakdown, load_population, presets, revenue, synthesize, Error, Household, MetricsReport,
    Money, Policy, Population, SynthesisParams,
};

use crate::render::SolveReport;

const MAX_BODY_BYTES: usize = 64 * 1024 * 1024;

#[derive(Default)]
pub struct Workspace {
    populations: RwLock<HashMap<String, Arc<Population>>>,
    next_id: AtomicU64,
}

impl Workspace {
    pub fn insert(&self, population: Population) -> String {
        let id = format!("pop-{}", self.next_id.fetch_add(1, Ordering::Relaxed) + 1);
        self.populations.write().expect("workspace lock poisoned").insert(id.clone(), Arc::new(population));
        id
    }

    pub fn get(&self, id: &str) -> Result<Arc<Population>, ApiError> {
        self.populations
            .read()
            .expect("workspace lock poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "unknown_population", format!("no population {id:?}")))
    }
}

pub type SharedWorkspace = Arc<Workspace>;

#[derive(Debug, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into() }
    }

    fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidInput(_) => "invalid_input",
            Error::InvalidSchedule(_) => "invalid_schedule",
            Error::PeriodMismatch { .. } => "period_mismatch",
            Error::UndefinedRate | Error::UndefinedMetric(_) => "undefined_metric",
            Error::Parse { .. } => "parse_error",
            Error::Validation { .. } => "validation_error",
            Error::PolicyFile(_) => "invalid_policy",
            Error::Unreachable { .. } => {
                return Self::new(StatusCode::UNPROCESSABLE_ENTITY, "unreachable_target", e.to_string())
            }
            Error::Solver(_) => return Self::new(StatusCode::UNPROCESSABLE_ENTITY, "solver_error", e.to_string()),
            Error::Io(_) => return Self::new(StatusCode::INTERNAL_SERVER_ERROR, "io_error", e.to_string()),
        };
        Self::bad_request(code, e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::bad_request("invalid_request", e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

/// A preset name or an inline policy.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PolicySpec {
    Preset(String),
    Inline(Box<Policy>),
}

impl PolicySpec {
    fn resolve(self) -> Result<Policy, ApiError> {
        match self {
            PolicySpec::Preset(name) => presets::by_name(&name).ok_or_else(|| {
                ApiError::bad_request(
                    "unknown_preset",
                    format!("unknown preset {name:?}; available: {}", presets::PRESET_NAMES.join(", ")),
                )
            }),
            PolicySpec::Inline(policy) => {
                policy.validate()?;
                Ok(*policy)
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PopulationRequest {
    Csv(String),
    Synthesis(SynthesisParams),
}

#[derive(Debug, Serialize)]
pub struct PopulationCreated {
    pub population_id: String,
    pub summary: PopulationSummary,
}

#[derive(Debug, Deserialize)]
pub struct EvaluateRequest {
    pub population_id: String,
    pub policy: PolicySpec,
}

#[derive(Debug, Deserialize)]
pub struct WhatIfRequest {
    pub household: Household,
    pub policy: PolicySpec,
}

#[derive(Debug, Deserialize)]
pub struct CompareRequest {
    pub population_id: String,
    pub policies: Vec<PolicySpec>,
}

#[derive(Debug, Deserialize)]
pub struct SweepRequest {
    pub population_id: String,
    pub policy: PolicySpec,
    pub parameter: String,
    pub values: Vec<String>,
}

fn default_tolerance() -> Money {
    Money::from_bgn(1)
}

#[derive(Debug, Deserialize)]
pub struct SolveRequest {
    pub population_id: String,
    pub policy: PolicySpec,
    #[serde(rename = "target_bgn")]
    pub target: Money,
    #[serde(rename = "tolerance_bgn", default = "default_tolerance")]
    pub tolerance: Money,
}

/// Runs CPU-bound engine work off the async executor.
async fn blocking<T, F>(work: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
{
    tokio::task::spawn_blocking(work)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal_error", e.to_string()))?
}

async fn list_presets() -> Json<Vec<Policy>> {
    Json(presets::all())
}

async fn create_population(State(ws): State<SharedWorkspace>, headers: HeaderMap, body: Bytes) -> Response {
    let is_csv = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("text/csv") || v.starts_with("text/plain"));
    let loaded = blocking(move || {
        let population = if is_csv {
            load_population(body.as_ref())?
        } else {
            let request: PopulationRequest =
                serde_json::from_slice(&body).map_err(|e| ApiError::bad_request("invalid_request", e.to_string()))?;
            match request {
                PopulationRequest::Csv(text) => load_population(text.as_bytes())?,
                PopulationRequest::Synthesis(params) => synthesize(&params)?,
            }
        };
        Ok(population)
    })
    .await;
    match loaded {
        Ok(population) => {
            let summary = population.summary();
            let population_id = ws.insert(population);
            (StatusCode::CREATED, Json(PopulationCreated { population_id, summary })).into_response()
        }
        Err(e) => e.into_response(),
    }
}

async fn population_summary(State(ws): State<SharedWorkspace>, Path(id): Path<String>) -> ApiResult<PopulationSummary> {
    Ok(Json(ws.get(&id)?.summary()))
}

async fn evaluate_policy(
    State(ws): State<SharedWorkspace>,
    body: Result<Json<EvaluateRequest>, JsonRejection>,
) -> ApiResult<MetricsReport> {
    let Json(req) = body?;
    let population = ws.get(&req.population_id)?;
    let policy = req.policy.resolve()?;
    blocking(move || Ok(evaluate(&population, &policy)?)).await.map(Json)
}

async fn whatif(body: Result<Json<WhatIfRequest>, JsonRejection>) -> ApiResult<HouseholdBreakdown> {
    let Json(req) = body?;
    let policy = req.policy.resolve()?;
    Ok(Json(household_breakdown(&req.household, &policy)?))
}

async fn compare_policies(
    State(ws): State<SharedWorkspace>,
    body: Result<Json<CompareRequest>, JsonRejection>,
) -> ApiResult<Comparison> {
    let Json(req) = body?;
    let population = ws.get(&req.population_id)?;
    let policies = req.policies.into_iter().map(PolicySpec::resolve).collect::<Result<Vec<_>, _>>()?;
    blocking(move || Ok(lab::compare(&population, &policies)?)).await.map(Json)
}

async fn sweep_parameter(
    State(ws): State<SharedWorkspace>,
    body: Result<Json<SweepRequest>, JsonRejection>,
) -> ApiResult<Vec<SweepPoint>> {
    let Json(req) = body?;
    let population = ws.get(&req.population_id)?;
    let policy = req.policy.resolve()?;
    blocking(move || Ok(lab::sweep(&population, &policy, &req.parameter, &req.values)?)).await.map(Json)
}

pub fn solve_report(
    population: &Population,
    policy: &Policy,
    target: Money,
    tolerance: Money,
) -> taxsim_core::Result<SolveReport> {
    let solution = lab::revenue_neutral_scale(policy, population, target, tolerance)?;
    Ok(SolveReport {
        policy: policy.name.clone(),
        current_revenue: revenue(population, policy)?,
        target,
        tolerance,
        solution,
    })
}

async fn solve(
    State(ws): State<SharedWorkspace>,
    body: Result<Json<SolveRequest>, JsonRejection>,
) -> ApiResult<SolveReport> {
    let Json(req) = body?;
    let population = ws.get(&req.population_id)?;
    let policy = req.policy.resolve()?;
    blocking(move || Ok(solve_report(&population, &policy, req.target, req.tolerance)?)).await.map(Json)
}

pub fn router(workspace: SharedWorkspace) -> Router {
    Router::new()
        .route("/api/presets", get(list_presets))
        .route("/api/population", post(create_population))
        .route("/api/population/{id}", get(population_summary))
        .route("/api/evaluate", post(evaluate_policy))
        .route("/api/household/whatif", post(whatif))
        .route("/api/compare", post(compare_policies))
        .route("/api/sweep", post(sweep_parameter))
        .route("/api/solve", post(solve))
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .with_state(workspace)
}

/// Serves the API until the process is stopped.
pub async fn serve(addr: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("taxsim listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(SharedWorkspace::default())).await
}
