//! HTTP adapter over [`Session`]. Requests run one at a time against the
//! session; the event stream replays the session's event log from a cursor,
//! so a slow client lags behind but never loses or reorders events.

use std::convert::Infallible;
use std::sync::{Arc, Mutex, MutexGuard};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event as SseEvent, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use futures::stream::{self, Stream};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;
use tokio::sync::watch;

use crate::session::{ApiError, ApiResult, Session};

#[derive(Clone)]
pub struct AppState {
    session: Arc<Mutex<Session>>,
    /// Carries the event count after each request.
    events: watch::Sender<usize>,
}

impl AppState {
    pub fn new(session: Session) -> AppState {
        let count = session.event_count();
        AppState {
            session: Arc::new(Mutex::new(session)),
            events: watch::Sender::new(count),
        }
    }

    pub fn lock(&self) -> MutexGuard<'_, Session> {
        self.session
            .lock()
            .unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    /// Runs `f` on the session and wakes event-stream clients.
    fn update<T>(&self, f: impl FnOnce(&mut Session) -> T) -> T {
        let mut session = self.lock();
        let out = f(&mut session);
        self.events.send_replace(session.event_count());
        out
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::BAD_REQUEST);
        (status, Json(self.body())).into_response()
    }
}

fn reply(result: ApiResult) -> Response {
    match result {
        Ok(body) => Json(body).into_response(),
        Err(e) => e.into_response(),
    }
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    let body: &[u8] = if body.is_empty() { b"{}" } else { body };
    serde_json::from_slice(body).map_err(|e| ApiError::new(400, "bad-request", e.to_string()))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/models", get(list_models))
        .route("/models/{name}/activate", post(activate))
        .route("/entities/{id}", get(describe))
        .route("/query", post(query))
        .route("/buses", get(list_buses).post(create_bus))
        .route("/buses/{id}/history", get(bus_history))
        .route("/tools", get(list_tools).post(create_tool))
        .route("/tools/{id}", get(tool_state))
        .route("/tools/{id}/mode", put(set_mode))
        .route("/tools/{id}/bridge", put(set_bridge))
        .route("/tools/{id}/attach", post(attach))
        .route("/tools/{id}/detach", post(detach))
        .route("/tools/{id}/select", post(select))
        .route("/tools/{id}/query", post(tool_query))
        .route("/tools/{id}/navigate", post(navigate))
        .route("/tools/{id}/replay", post(replay))
        .route("/tools/{id}/min-tokens", put(min_tokens))
        .route("/tools/{id}/export", get(export))
        .route("/events", get(events))
        .route("/events/log", get(event_log))
        .fallback(|| async { ApiError::new(404, "not-found", "no such endpoint") })
        .with_state(state)
}

async fn list_models(State(s): State<AppState>) -> Response {
    reply(Ok(s.lock().list_models()))
}

async fn activate(State(s): State<AppState>, Path(name): Path<String>) -> Response {
    reply(s.update(|session| session.activate(&name)))
}

async fn describe(State(s): State<AppState>, Path(id): Path<u64>) -> Response {
    reply(s.lock().describe(id))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QueryRequest {
    pipeline: String,
    #[serde(default)]
    input: Option<Vec<u64>>,
}

async fn query(State(s): State<AppState>, body: Bytes) -> Response {
    reply(
        parse::<QueryRequest>(&body).and_then(|q| s.lock().query(&q.pipeline, q.input.as_deref())),
    )
}

async fn list_buses(State(s): State<AppState>) -> Response {
    reply(Ok(s.lock().list_buses()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateBus {
    #[serde(default)]
    name: Option<String>,
}

async fn create_bus(State(s): State<AppState>, body: Bytes) -> Response {
    reply(
        parse::<CreateBus>(&body)
            .and_then(|b| s.update(|session| session.create_bus(b.name.as_deref()))),
    )
}

async fn bus_history(State(s): State<AppState>, Path(id): Path<u32>) -> Response {
    reply(s.lock().bus_history(id))
}

async fn list_tools(State(s): State<AppState>) -> Response {
    reply(Ok(s.lock().list_tools()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateTool {
    kind: String,
    #[serde(default)]
    buses: Vec<u32>,
}

async fn create_tool(State(s): State<AppState>, body: Bytes) -> Response {
    reply(
        parse::<CreateTool>(&body)
            .and_then(|t| s.update(|session| session.create_tool(&t.kind, &t.buses))),
    )
}

async fn tool_state(State(s): State<AppState>, Path(id): Path<u32>) -> Response {
    reply(s.lock().tool_state(id))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModeRequest {
    mode: String,
}

async fn set_mode(State(s): State<AppState>, Path(id): Path<u32>, body: Bytes) -> Response {
    reply(
        parse::<ModeRequest>(&body).and_then(|m| s.update(|session| session.set_mode(id, &m.mode))),
    )
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BridgeRequest {
    bridge: bool,
}

async fn set_bridge(State(s): State<AppState>, Path(id): Path<u32>, body: Bytes) -> Response {
    reply(
        parse::<BridgeRequest>(&body)
            .and_then(|b| s.update(|session| session.set_bridge(id, b.bridge))),
    )
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BusRequest {
    bus: u32,
}

async fn attach(State(s): State<AppState>, Path(id): Path<u32>, body: Bytes) -> Response {
    reply(parse::<BusRequest>(&body).and_then(|b| s.update(|session| session.attach(id, b.bus))))
}

async fn detach(State(s): State<AppState>, Path(id): Path<u32>, body: Bytes) -> Response {
    reply(parse::<BusRequest>(&body).and_then(|b| s.update(|session| session.detach(id, b.bus))))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SelectRequest {
    entities: Vec<u64>,
    #[serde(default)]
    bus: Option<u32>,
}

async fn select(State(s): State<AppState>, Path(id): Path<u32>, body: Bytes) -> Response {
    reply(
        parse::<SelectRequest>(&body)
            .and_then(|r| s.update(|session| session.select(id, &r.entities, r.bus))),
    )
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PipelineRequest {
    pipeline: String,
}

async fn tool_query(State(s): State<AppState>, Path(id): Path<u32>, body: Bytes) -> Response {
    reply(
        parse::<PipelineRequest>(&body)
            .and_then(|r| s.update(|session| session.run_tool_query(id, &r.pipeline))),
    )
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NavigateRequest {
    slot: String,
}

async fn navigate(State(s): State<AppState>, Path(id): Path<u32>, body: Bytes) -> Response {
    reply(
        parse::<NavigateRequest>(&body)
            .and_then(|r| s.update(|session| session.navigate(id, &r.slot))),
    )
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReplayRequest {
    entry: usize,
}

async fn replay(State(s): State<AppState>, Path(id): Path<u32>, body: Bytes) -> Response {
    reply(
        parse::<ReplayRequest>(&body).and_then(|r| s.update(|session| session.replay(id, r.entry))),
    )
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct MinTokensRequest {
    min_tokens: usize,
}

async fn min_tokens(State(s): State<AppState>, Path(id): Path<u32>, body: Bytes) -> Response {
    reply(
        parse::<MinTokensRequest>(&body)
            .and_then(|r| s.update(|session| session.set_min_tokens(id, r.min_tokens))),
    )
}

#[derive(Deserialize)]
struct ExportParams {
    format: Option<String>,
}

async fn export(
    State(s): State<AppState>,
    Path(id): Path<u32>,
    Query(p): Query<ExportParams>,
) -> Response {
    let format = p.format.unwrap_or_else(|| "csv".into());
    match s.lock().export_log(id, &format) {
        Ok(text) => {
            let mime = if format == "csv" {
                "text/csv"
            } else {
                "text/plain"
            };
            ([(header::CONTENT_TYPE, mime)], text).into_response()
        }
        Err(e) => e.into_response(),
    }
}

#[derive(Deserialize)]
struct FromParams {
    from: Option<usize>,
}

async fn event_log(State(s): State<AppState>, Query(p): Query<FromParams>) -> Response {
    let session = s.lock();
    let (events, next) = session.events_since(p.from.unwrap_or(0));
    reply(Ok(serde_json::json!({ "next": next, "events": events })))
}

/// Server-sent events, one JSON event per `data:` line, starting at `from`
/// (default: the current end of the log).
async fn events(
    State(s): State<AppState>,
    Query(p): Query<FromParams>,
) -> Sse<impl Stream<Item = Result<SseEvent, Infallible>>> {
    let start = p.from.unwrap_or_else(|| s.lock().event_count());
    let rx = s.events.subscribe();
    let stream = stream::unfold(
        (s, rx, start, Vec::<Value>::new()),
        |(s, mut rx, mut cursor, mut pending)| async move {
            loop {
                if !pending.is_empty() {
                    let event = pending.remove(0);
                    let data = SseEvent::default().data(event.to_string());
                    return Some((Ok(data), (s, rx, cursor, pending)));
                }
                {
                    let session = s.lock();
                    let (fresh, next) = session.events_since(cursor);
                    pending.extend(fresh.iter().cloned());
                    cursor = next;
                }
                if pending.is_empty() && rx.changed().await.is_err() {
                    return None;
                }
            }
        },
    );
    Sse::new(stream).keep_alive(KeepAlive::default())
}

/// Serves until the process is stopped.
pub async fn serve(session: Session, host: &str, port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind((host, port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(session))).await
}
