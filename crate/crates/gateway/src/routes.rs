use std::collections::BTreeMap;
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{OriginalUri, Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use biblio_core::geom::Point;
use biblio_core::locate::{BeaconObservation, LocateError};
use biblio_core::log::{ApiLogEntry, Module};
use biblio_core::recommend::WIRE_VERSION;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::logsink::LogSink;
use crate::state::AppState;

/// Requests carrying this header are logged at the given RFC 3339 instant
/// instead of the wall clock. The harness uses it to replay a simulated
/// year in seconds.
pub const SIMULATED_TIME_HEADER: &str = "x-simulated-time";

#[derive(Debug)]
pub struct Gateway {
    pub state: AppState,
    pub sink: LogSink,
}

pub fn router(gateway: Arc<Gateway>) -> Router {
    Router::new()
        .route("/api/wayfinder/map_data/{collection}/{bib_id}", get(map_data))
        .route("/api/recommend/popularnear", get(popular_near))
        .route("/api/locate", post(locate))
        .with_state(gateway)
}

/// Wayfinder answer, keyed like the annotated wayfinder table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapDataResponse {
    pub v: u32,
    #[serde(rename = "X")]
    pub x: i64,
    #[serde(rename = "Y")]
    pub y: i64,
    #[serde(rename = "shelf-number")]
    pub shelf_number: u32,
    #[serde(rename = "call-number")]
    pub call_number: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorResponse {
    pub v: u32,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocateRequest {
    pub observations: Vec<BeaconObservation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocateResponse {
    pub v: u32,
    pub x: f64,
    pub y: f64,
    pub confidence_radius: f64,
    pub used: Vec<String>,
    pub ignored_unknown: usize,
    pub ignored_invalid: usize,
}

fn timestamp(headers: &HeaderMap) -> DateTime<Utc> {
    headers
        .get(SIMULATED_TIME_HEADER)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| DateTime::parse_from_rfc3339(v).ok())
        .map_or_else(Utc::now, |t| t.with_timezone(&Utc))
}

fn uri_text(uri: &OriginalUri) -> String {
    uri.0
        .path_and_query()
        .map_or_else(|| uri.0.path().to_string(), |pq| pq.as_str().to_string())
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (
        status,
        Json(ErrorResponse {
            v: WIRE_VERSION,
            error: message.into(),
        }),
    )
        .into_response()
}

struct Transaction<'a> {
    gateway: &'a Gateway,
    timestamp: DateTime<Utc>,
    module: Module,
    uri: String,
    params: BTreeMap<String, String>,
}

impl Transaction<'_> {
    fn finish(self, status: StatusCode, bib_ids: Vec<String>) {
        let bib_ids = if status.is_success() { bib_ids } else { Vec::new() };
        self.gateway.sink.append(&ApiLogEntry {
            timestamp: self.timestamp,
            module: self.module,
            uri: self.uri,
            params: self.params,
            status: status.as_u16(),
            bib_ids,
        });
    }
}

async fn map_data(
    State(gw): State<Arc<Gateway>>,
    Path((collection, bib_id)): Path<(String, String)>,
    uri: OriginalUri,
    headers: HeaderMap,
) -> Response {
    let tx = Transaction {
        gateway: &gw,
        timestamp: timestamp(&headers),
        module: Module::Wayfinder,
        uri: uri_text(&uri),
        params: BTreeMap::new(),
    };
    let state = &gw.state;
    if collection != state.collection {
        tx.finish(StatusCode::NOT_FOUND, Vec::new());
        return error(StatusCode::NOT_FOUND, format!("unknown collection {collection}"));
    }
    let Some(record) = state.corpus.get(&bib_id) else {
        tx.finish(StatusCode::NOT_FOUND, Vec::new());
        return error(StatusCode::NOT_FOUND, format!("unknown bib_id {bib_id}"));
    };
    let Some(shelf) = state.map.shelf_for_call(&record.call_number) else {
        tx.finish(StatusCode::NOT_FOUND, Vec::new());
        return error(
            StatusCode::NOT_FOUND,
            format!("{} is not shelved in the mapped stacks", record.call_number),
        );
    };
    let target = shelf.target();
    let body = MapDataResponse {
        v: WIRE_VERSION,
        x: target.x.round() as i64,
        y: target.y.round() as i64,
        shelf_number: shelf.shelf_number,
        call_number: record.call_number.canonical(),
    };
    tx.finish(StatusCode::OK, vec![bib_id]);
    (StatusCode::OK, Json(body)).into_response()
}

fn coordinate(params: &BTreeMap<String, String>, key: &str) -> Result<f64, String> {
    let raw = params.get(key).ok_or_else(|| format!("missing parameter {key}"))?;
    match raw.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("parameter {key} is not a finite number: {raw:?}")),
    }
}

async fn popular_near(
    State(gw): State<Arc<Gateway>>,
    query: Result<Query<BTreeMap<String, String>>, QueryRejection>,
    uri: OriginalUri,
    headers: HeaderMap,
) -> Response {
    let (params, rejection) = match query {
        Ok(Query(p)) => (p, None),
        Err(e) => (BTreeMap::new(), Some(e.body_text())),
    };
    let tx = Transaction {
        gateway: &gw,
        timestamp: timestamp(&headers),
        module: Module::Recommend,
        uri: uri_text(&uri),
        params,
    };
    if let Some(msg) = rejection {
        tx.finish(StatusCode::BAD_REQUEST, Vec::new());
        return error(StatusCode::BAD_REQUEST, msg);
    }
    let point = coordinate(&tx.params, "x").and_then(|x| coordinate(&tx.params, "y").map(|y| Point::new(x, y)));
    let p = match point {
        Ok(p) => p,
        Err(msg) => {
            tx.finish(StatusCode::BAD_REQUEST, Vec::new());
            return error(StatusCode::BAD_REQUEST, msg);
        }
    };
    let set = gw.state.recommender().recommend_near(p);
    let body = set.to_wire();
    tx.finish(StatusCode::OK, set.bib_ids());
    (StatusCode::OK, Json(body)).into_response()
}

async fn locate(
    State(gw): State<Arc<Gateway>>,
    uri: OriginalUri,
    headers: HeaderMap,
    body: Result<Json<LocateRequest>, JsonRejection>,
) -> Response {
    let tx = Transaction {
        gateway: &gw,
        timestamp: timestamp(&headers),
        module: Module::Locate,
        uri: uri_text(&uri),
        params: BTreeMap::new(),
    };
    let Some(beacons) = &gw.state.beacons else {
        tx.finish(StatusCode::SERVICE_UNAVAILABLE, Vec::new());
        return error(StatusCode::SERVICE_UNAVAILABLE, "no beacon deployment configured");
    };
    let req = match body {
        Ok(Json(r)) => r,
        Err(e) => {
            tx.finish(StatusCode::BAD_REQUEST, Vec::new());
            return error(StatusCode::BAD_REQUEST, e.body_text());
        }
    };
    match beacons.estimate(&req.observations, gw.state.locate) {
        Ok(est) => {
            tx.finish(StatusCode::OK, Vec::new());
            let body = LocateResponse {
                v: WIRE_VERSION,
                x: est.location.x,
                y: est.location.y,
                confidence_radius: est.location.confidence_radius,
                used: est.used,
                ignored_unknown: est.ignored_unknown,
                ignored_invalid: est.ignored_invalid,
            };
            (StatusCode::OK, Json(body)).into_response()
        }
        Err(e @ LocateError::NoKnownBeacons) => {
            tx.finish(StatusCode::UNPROCESSABLE_ENTITY, Vec::new());
            error(StatusCode::UNPROCESSABLE_ENTITY, e.to_string())
        }
        Err(e) => {
            tx.finish(StatusCode::INTERNAL_SERVER_ERROR, Vec::new());
            error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
        }
    }
}
