//! Axum routes over [`Service`].

use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequest, Path, Query, Request, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{ApiError, ApiResult, ErrorCode};
use crate::service::{ActionRequest, GoalsRequest, RatingRequest, RegisterRequest, Service};

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

/// JSON body whose rejections use the API error shape.
pub struct ApiJson<T>(pub T);

/// Field name from a serde message such as "missing field `city`".
fn field_of(message: &str) -> Option<String> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(message[start..start + len].to_string())
}

impl<S, T> FromRequest<S> for ApiJson<T>
where
    T: DeserializeOwned,
    S: Send + Sync,
{
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(ApiJson(v)),
            Err(rejection) => {
                let message = match &rejection {
                    JsonRejection::JsonDataError(e) => {
                        std::error::Error::source(e).map_or_else(|| e.body_text(), |s| s.to_string())
                    }
                    other => other.body_text(),
                };
                Err(ApiError { field: field_of(&message), ..ApiError::new(ErrorCode::Validation, message) })
            }
        }
    }
}

fn bearer(headers: &HeaderMap) -> Option<&str> {
    headers.get(header::AUTHORIZATION)?.to_str().ok()?.strip_prefix("Bearer ").map(str::trim)
}

async fn blocking<R, F>(svc: &Arc<Service>, f: F) -> ApiResult<R>
where
    R: Send + 'static,
    F: FnOnce(&Service) -> ApiResult<R> + Send + 'static,
{
    let svc = Arc::clone(svc);
    tokio::task::spawn_blocking(move || f(&svc)).await.map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

/// Runs `f` after checking the caller's session for `learner_id`.
async fn as_learner<R, F>(svc: &Arc<Service>, headers: &HeaderMap, learner_id: String, f: F) -> ApiResult<R>
where
    R: Send + 'static,
    F: FnOnce(&Service, &str) -> ApiResult<R> + Send + 'static,
{
    let token = bearer(headers).map(String::from);
    blocking(svc, move |s| {
        s.authorize(&learner_id, token.as_deref())?;
        f(s, &learner_id)
    })
    .await
}

async fn register(
    State(svc): State<Arc<Service>>,
    ApiJson(req): ApiJson<RegisterRequest>,
) -> ApiResult<impl IntoResponse> {
    let out = blocking(&svc, move |s| s.register_learner(req)).await?;
    Ok((StatusCode::CREATED, Json(out)))
}

async fn set_goals(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    ApiJson(req): ApiJson<GoalsRequest>,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(as_learner(&svc, &headers, id, move |s, id| s.set_goals(id, req)).await?))
}

#[derive(Debug, Default, Deserialize)]
struct PlaceQuery {
    country: Option<String>,
    city: Option<String>,
}

async fn job_skills(
    State(svc): State<Arc<Service>>,
    Path(title): Path<String>,
    Query(q): Query<PlaceQuery>,
) -> ApiResult<impl IntoResponse> {
    let blank = |v: Option<String>| v.filter(|s| !s.trim().is_empty());
    let (country, city) = (blank(q.country), blank(q.city));
    Ok(Json(blocking(&svc, move |s| s.job_skills(&title, country.as_deref(), city.as_deref())).await?))
}

#[derive(Debug, Default, Deserialize)]
struct SkillQuery {
    skill: Option<String>,
}

async fn recommendation(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    Query(q): Query<SkillQuery>,
) -> ApiResult<impl IntoResponse> {
    let skill =
        q.skill.filter(|s| !s.trim().is_empty()).ok_or_else(|| ApiError::validation("skill", "skill is required"))?;
    Ok(Json(as_learner(&svc, &headers, id, move |s, id| s.get_recommendation(id, &skill)).await?))
}

async fn rating(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    ApiJson(req): ApiJson<RatingRequest>,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(as_learner(&svc, &headers, id, move |s, id| s.submit_rating(id, req)).await?))
}

async fn action(
    State(svc): State<Arc<Service>>,
    Path((id, rec_id)): Path<(String, String)>,
    headers: HeaderMap,
    ApiJson(req): ApiJson<ActionRequest>,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(as_learner(&svc, &headers, id, move |s, id| s.recommendation_action(id, &rec_id, req)).await?))
}

#[derive(Debug, Default, Deserialize)]
struct MonthQuery {
    month: Option<String>,
}

async fn progress(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    Query(q): Query<MonthQuery>,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(as_learner(&svc, &headers, id, move |s, id| s.progress_report(id, q.month.as_deref())).await?))
}

async fn fallback() -> ApiError {
    ApiError::not_found("no such route")
}

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/learners", post(register))
        .route("/learners/{id}/goals", post(set_goals))
        .route("/jobs/{title}/skills", get(job_skills))
        .route("/learners/{id}/recommendations", get(recommendation))
        .route("/learners/{id}/ratings", post(rating))
        .route("/learners/{id}/recommendations/{rec_id}/action", post(action))
        .route("/learners/{id}/progress", get(progress))
        .fallback(fallback)
        .with_state(service)
}
