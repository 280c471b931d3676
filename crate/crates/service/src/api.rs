//! HTTP routes.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::{ConnectInfo, Path, Query, Request, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use dp_registry::io::{card_to_value, parse_card, ParseError};
use dp_registry::query::{Query as TableQuery, QueryError};
use dp_registry::validate::{admission_report, infer_tier, validate_at_tier};
use dp_registry::{AggregateResult, AggregateVariable, RowProjection, TransparencyTier, ValidationIssue, ValidationReport, YearRange};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::pending::{self, PendingSubmission, SubmissionStatus};
use crate::state::AppState;

/// Largest accepted submission body.
pub const MAX_SUBMISSION_BYTES: usize = 256 * 1024;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListResponse {
    pub total: usize,
    pub rows: Vec<RowProjection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardResponse {
    pub card: Value,
    pub inferred_tier: Option<TransparencyTier>,
    pub validation: ValidationReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmitResponse {
    pub submission_id: String,
    pub status: SubmissionStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HealthResponse {
    pub status: String,
    pub corpus_size: usize,
}

/// Error body for 4xx/5xx responses other than 422.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssuesBody {
    pub issues: Vec<ValidationIssue>,
}

#[derive(Debug)]
pub enum ApiError {
    BadRequest { code: &'static str, detail: String },
    NotFound,
    Unprocessable(Vec<ValidationIssue>),
    Conflict(String),
    RateLimited,
    Internal(String),
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        let code = match e {
            QueryError::UnknownColumn(_) => "unknown_column",
            QueryError::InvalidFilter { .. } => "invalid_filter",
            QueryError::InvalidParameter { .. } => "invalid_parameter",
        };
        ApiError::BadRequest {
            code,
            detail: e.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let error = |status: StatusCode, code: &str, detail: Option<String>| {
            let body = ErrorBody {
                error: code.to_owned(),
                detail,
            };
            (status, Json(body)).into_response()
        };
        match self {
            ApiError::BadRequest { code, detail } => error(StatusCode::BAD_REQUEST, code, Some(detail)),
            ApiError::NotFound => error(StatusCode::NOT_FOUND, "not_found", None),
            ApiError::Unprocessable(issues) => (StatusCode::UNPROCESSABLE_ENTITY, Json(IssuesBody { issues })).into_response(),
            ApiError::Conflict(detail) => error(StatusCode::CONFLICT, "conflict", Some(detail)),
            ApiError::RateLimited => error(StatusCode::TOO_MANY_REQUESTS, "rate_limited", None),
            ApiError::Internal(detail) => {
                tracing::error!("{detail}");
                error(StatusCode::INTERNAL_SERVER_ERROR, "internal", None)
            }
        }
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

/// The API router. `cors_origin` of `*` allows any origin.
pub fn router(state: Arc<AppState>, cors_origin: Option<&str>) -> Router {
    let router = Router::new()
        .route("/api/deployments", get(list))
        .route("/api/deployments/{id}", get(get_card))
        .route("/api/aggregate", get(aggregate))
        .route("/api/aggregate/by-year", get(aggregate_by_year))
        .route("/api/submissions", post(submit))
        .route("/api/guide", get(guide))
        .route("/api/health", get(health))
        .fallback(|| async { ApiError::NotFound })
        .with_state(state);
    match cors_origin {
        None => router,
        Some(origin) => {
            let allow = if origin == "*" {
                AllowOrigin::any()
            } else {
                match HeaderValue::from_str(origin) {
                    Ok(value) => AllowOrigin::exact(value),
                    Err(_) => {
                        tracing::warn!(origin, "ignoring malformed CORS origin");
                        return router;
                    }
                }
            };
            router.layer(
                CorsLayer::new()
                    .allow_origin(allow)
                    .allow_methods([Method::GET, Method::POST])
                    .allow_headers([header::CONTENT_TYPE]),
            )
        }
    }
}

async fn list(State(state): State<Arc<AppState>>, Query(params): Query<Vec<(String, String)>>) -> ApiResult<ListResponse> {
    let query = TableQuery::from_params(params.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
    let rows = state.snapshot().index.run_query(&query)?;
    Ok(Json(ListResponse { total: rows.len(), rows }))
}

async fn get_card(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<CardResponse> {
    let snapshot = state.snapshot();
    let card = snapshot.index.card(&id).ok_or(ApiError::NotFound)?;
    Ok(Json(CardResponse {
        card: card_to_value(card),
        inferred_tier: infer_tier(card),
        validation: validate_at_tier(card, card.declared_tier),
    }))
}

fn variable_and_range(params: &HashMap<String, String>) -> Result<(AggregateVariable, Option<YearRange>), ApiError> {
    let variable = params.get("variable").ok_or_else(|| ApiError::BadRequest {
        code: "invalid_parameter",
        detail: "missing parameter `variable`".into(),
    })?;
    let variable: AggregateVariable = variable.parse().map_err(|e: dp_registry::aggregate::UnknownVariable| {
        ApiError::BadRequest {
            code: "unknown_variable",
            detail: e.to_string(),
        }
    })?;
    let year = |name: &str| -> Result<Option<i32>, ApiError> {
        match params.get(name).map(String::as_str) {
            None | Some("") => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| ApiError::BadRequest {
                code: "invalid_parameter",
                detail: format!("`{v}` is not a year for `{name}`"),
            }),
        }
    };
    let range = YearRange {
        min: year("year_from")?,
        max: year("year_to")?,
    };
    let range = (range != YearRange::default()).then_some(range);
    Ok((variable, range))
}

async fn aggregate(State(state): State<Arc<AppState>>, Query(params): Query<HashMap<String, String>>) -> ApiResult<AggregateResult> {
    let (variable, range) = variable_and_range(&params)?;
    Ok(Json(state.snapshot().index.aggregate(variable, range)))
}

async fn aggregate_by_year(
    State(state): State<Arc<AppState>>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<AggregateResult> {
    let (variable, _) = variable_and_range(&params)?;
    Ok(Json(state.snapshot().index.aggregate_by_year(variable)))
}

async fn guide(State(state): State<Arc<AppState>>) -> Json<Value> {
    Json(json!(state.guide))
}

async fn health(State(state): State<Arc<AppState>>) -> Json<HealthResponse> {
    Json(HealthResponse {
        status: "ok".into(),
        corpus_size: state.snapshot().index.len(),
    })
}

fn parse_issue(e: &ParseError) -> ValidationIssue {
    ValidationIssue::error(e.kind(), e.path(), e.to_string())
}

async fn submit(State(state): State<Arc<AppState>>, request: Request) -> Result<(StatusCode, Json<SubmitResponse>), ApiError> {
    let peer = request
        .extensions()
        .get::<ConnectInfo<SocketAddr>>()
        .map_or_else(|| "unknown".to_owned(), |ConnectInfo(addr)| addr.ip().to_string());
    if !state.limiter.check(&peer, Instant::now()) {
        return Err(ApiError::RateLimited);
    }

    let body: Bytes = axum::body::to_bytes(request.into_body(), MAX_SUBMISSION_BYTES)
        .await
        .map_err(|e| ApiError::BadRequest {
            code: "invalid_body",
            detail: e.to_string(),
        })?;
    let text = std::str::from_utf8(&body).map_err(|_| {
        ApiError::Unprocessable(vec![ValidationIssue::error("malformed-syntax", "$", "body is not UTF-8")])
    })?;
    let card = parse_card(text).map_err(|e| ApiError::Unprocessable(vec![parse_issue(&e)]))?;
    let report = admission_report(&card);
    if !report.passed {
        return Err(ApiError::Unprocessable(report.issues));
    }

    let _writer = state.pending_writer.lock().await;
    let snapshot = state.snapshot();
    let queued = pending::pending_ids(&state.pending_dir).map_err(|e| ApiError::Internal(e.to_string()))?;
    if queued.contains(&card.id) {
        return Err(ApiError::Conflict(format!("submission `{}` is already pending", card.id)));
    }
    let queued_cards: Vec<_> = queued
        .iter()
        .filter_map(|id| pending::read_pending(&state.pending_dir, id).ok().map(|(_, c)| c))
        .collect();
    if let Some(reason) = pending::conflict_with(&card, snapshot.index.cards().chain(&queued_cards)) {
        return Err(ApiError::Conflict(reason));
    }

    let submission = PendingSubmission::new(&card, chrono::Utc::now());
    pending::write_pending(&state.pending_dir, &submission).map_err(|e| ApiError::Internal(e.to_string()))?;
    tracing::info!(id = %card.id, "submission queued");
    Ok((
        StatusCode::CREATED,
        Json(SubmitResponse {
            submission_id: submission.submission_id,
            status: submission.status,
        }),
    ))
}
