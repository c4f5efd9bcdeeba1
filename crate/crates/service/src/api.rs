//! HTTP routes over an [`ApiSession`].
//!
//! Bodies are JSON. Errors carry `{"code", "message"}`. Each request is
//! logged as one JSON object (`route`, `status`, `millis`) under the
//! `kgrec::access` log target.

use std::sync::Arc;
use std::time::Instant;

use axum::extract::{FromRequestParts, MatchedPath, Path, Query, Request, State};
use axum::http::request::Parts;
use axum::http::StatusCode;
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::session::{ApiError, ApiSession};

type Shared = State<Arc<ApiSession>>;

#[derive(Serialize)]
struct Envelope<'a> {
    code: &'a str,
    message: &'a str,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        let body = Json(Envelope {
            code: self.code,
            message: &self.message,
        });
        (status, body).into_response()
    }
}

type Reply<T> = Result<Json<T>, ApiError>;

/// Query string extractor that rejects with the JSON error envelope.
struct Q<T>(T);

impl<T: DeserializeOwned, S: Send + Sync> FromRequestParts<S> for Q<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, ApiError> {
        Query::<T>::from_request_parts(parts, state)
            .await
            .map(|Query(v)| Q(v))
            .map_err(|e| ApiError::bad_request(e.body_text()))
    }
}

fn split_users(users: Option<&str>) -> Option<Vec<String>> {
    users.map(|s| s.split(',').map(str::trim).filter(|u| !u.is_empty()).map(str::to_owned).collect())
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct RecommendQuery {
    n: Option<usize>,
    #[serde(default)]
    include_seen: bool,
}

async fn recommendations(
    State(s): Shared,
    Path(user): Path<String>,
    Q(q): Q<RecommendQuery>,
) -> Reply<Vec<crate::session::RecommendationEntry>> {
    s.recommendations(&user, q.n.unwrap_or(10), q.include_seen).map(Json)
}

#[derive(Deserialize)]
struct RatersQuery {
    subject: Option<String>,
}

async fn raters(State(s): Shared, Path(item): Path<String>, Q(q): Q<RatersQuery>) -> Reply<Vec<crate::session::RaterPoint>> {
    s.raters(&item, q.subject.as_deref()).map(Json)
}

#[derive(Deserialize)]
struct DistributionQuery {
    item: Option<String>,
    users: Option<String>,
}

async fn aspect_distribution(State(s): Shared, Q(q): Q<DistributionQuery>) -> Reply<crate::session::AspectHistograms> {
    let item = q.item.ok_or_else(|| ApiError::bad_request("missing `item` parameter"))?;
    let users = split_users(q.users.as_deref()).unwrap_or_default();
    s.aspect_distribution(&item, &users).map(Json)
}

async fn aspect_profile(State(s): Shared, Path(user): Path<String>) -> Reply<crate::session::AspectHistograms> {
    s.aspect_profile(&user).map(Json)
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct ReviewsQuery {
    users: Option<String>,
    page: Option<usize>,
    page_size: Option<usize>,
}

async fn reviews(State(s): Shared, Path(item): Path<String>, Q(q): Q<ReviewsQuery>) -> Reply<crate::session::ReviewPage> {
    let users = split_users(q.users.as_deref());
    s.reviews(&item, users.as_deref(), q.page.unwrap_or(0), q.page_size.unwrap_or(1))
        .map(Json)
}

#[derive(Deserialize)]
struct UsersQuery {
    users: Option<String>,
}

async fn rating_distribution(
    State(s): Shared,
    Path(item): Path<String>,
    Q(q): Q<UsersQuery>,
) -> Reply<crate::session::RatingDistribution> {
    let users = split_users(q.users.as_deref());
    s.rating_distribution(&item, users.as_deref()).map(Json)
}

async fn access_log(request: Request, next: Next) -> Response {
    let route = request
        .extensions()
        .get::<MatchedPath>()
        .map_or_else(|| request.uri().path().to_owned(), |m| m.as_str().to_owned());
    let started = Instant::now();
    let response = next.run(request).await;
    let line = serde_json::json!({
        "route": route,
        "status": response.status().as_u16(),
        "millis": started.elapsed().as_secs_f64() * 1e3,
    });
    log::info!(target: "kgrec::access", "{line}");
    response
}

pub fn router(session: Arc<ApiSession>) -> Router {
    Router::new()
        .route("/users/{key}/recommendations", get(recommendations))
        .route("/users/{key}/aspect-profile", get(aspect_profile))
        .route("/items/{key}/raters", get(raters))
        .route("/items/{key}/reviews", get(reviews))
        .route("/items/{key}/rating-distribution", get(rating_distribution))
        .route("/aspects/distribution", get(aspect_distribution))
        .fallback(|| async {
            ApiError {
                status: 404,
                code: "no_route",
                message: "no such endpoint".into(),
            }
        })
        .layer(middleware::from_fn(access_log))
        .with_state(session)
}

/// Serves until interrupted.
pub async fn serve(session: Arc<ApiSession>, address: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(address).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(session))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
