use crate::api::*;
use crate::service::Service;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use std::sync::Arc;

type Shared = State<Arc<Service>>;

impl IntoResponse for ErrorBody {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

/// Runs service work off the async executor; suggestions may solve an IP.
async fn blocking<T, F>(f: F) -> Result<T, ErrorBody>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, ErrorBody> + Send + 'static,
{
    tokio::task::spawn_blocking(f).await.unwrap_or_else(|e| Err(ErrorBody::new(500, "internal", e)))
}

async fn suggest(State(svc): Shared, Json(req): Json<SuggestRequest>) -> Result<Json<Suggestion>, ErrorBody> {
    blocking(move || svc.suggest(req)).await.map(Json)
}

async fn book(State(svc): Shared, Json(req): Json<BookingRequest>) -> Result<impl IntoResponse, ErrorBody> {
    let receipt = blocking(move || svc.book(req)).await?;
    Ok((StatusCode::CREATED, Json(receipt)))
}

async fn occupancy(State(svc): Shared, Query(q): Query<OccupancyQuery>) -> Result<Json<OccupancyMap>, ErrorBody> {
    svc.occupancy(q).map(Json)
}

async fn explanation(State(svc): Shared, Path(id): Path<String>) -> Result<Json<Explanation>, ErrorBody> {
    svc.explanation(&id).map(Json)
}

async fn what_if(State(svc): Shared, Json(req): Json<WhatIfRequest>) -> Result<Json<WhatIfResponse>, ErrorBody> {
    blocking(move || svc.what_if(req)).await.map(Json)
}

async fn state(State(svc): Shared) -> Json<StateSummary> {
    Json(svc.summary())
}

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/patients:suggest", post(suggest))
        .route("/bookings", post(book))
        .route("/occupancy", get(occupancy))
        .route("/explanations/{id}", get(explanation))
        .route("/whatif", post(what_if))
        .route("/state", get(state))
        .with_state(service)
}
