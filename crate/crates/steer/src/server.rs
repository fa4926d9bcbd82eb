use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use serde::Deserialize;
use tokio::sync::{broadcast, mpsc};
use tokio::task::JoinHandle;

use armlift::session::{Session, SessionSettings};
use armlift::{ArmSpec, Configuration};

use crate::error::{Result, SteerError};
use crate::hub::{Hub, SessionHandle};
use crate::protocol::{parse_inbound, Inbound, Outbound};

/// Apply one inbound frame. `current` is the session the sender is attached
/// to; `create` and `subscribe` replace it. Returns the direct replies.
pub async fn dispatch(hub: &Hub, current: &mut Option<SessionHandle>, frame: Inbound) -> Result<Vec<Outbound>> {
    let target = |current: &Option<SessionHandle>, id: Option<&str>| -> Result<SessionHandle> {
        match id {
            Some(id) => hub.get(id),
            None => current.clone().ok_or(SteerError::NoSession),
        }
    };
    let id = frame.session_id().map(str::to_owned);
    Ok(match frame {
        Inbound::Create { arm, q0, settings } => {
            let h = hub.create(arm, q0, settings)?;
            let state = h.state().await?;
            let out = vec![Outbound::Created { id: h.id().into() }, Outbound::State(state)];
            *current = Some(h);
            out
        }
        Inbound::Subscribe { id } => {
            let h = hub.get(&id)?;
            let state = h.state().await?;
            *current = Some(h);
            vec![Outbound::Subscribed { id }, Outbound::State(state)]
        }
        Inbound::SetTarget { point, .. } => {
            let h = target(current, id.as_deref())?;
            h.set_target(point).await?;
            vec![Outbound::Ack { id: h.id().into() }]
        }
        Inbound::TickRate { hz, .. } => {
            let h = target(current, id.as_deref())?;
            h.set_tick_rate(hz).await?;
            vec![Outbound::Ack { id: h.id().into() }]
        }
        Inbound::Tick { dt, .. } => {
            // The frame also reaches subscribers through the broadcast.
            let h = target(current, id.as_deref())?;
            h.tick(dt).await?;
            vec![Outbound::Ack { id: h.id().into() }]
        }
        Inbound::SnapshotRequest { .. } => {
            let h = target(current, id.as_deref())?;
            vec![Outbound::Holonomy { id: h.id().into(), snapshot: h.snapshot().await? }]
        }
        Inbound::ResetBaseline { .. } => {
            let h = target(current, id.as_deref())?;
            h.reset_baseline().await?;
            vec![Outbound::Ack { id: h.id().into() }]
        }
    })
}

pub fn router(hub: Arc<Hub>) -> Router {
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/ws", get(ws_upgrade))
        .route("/sessions", get(list_sessions).post(create_session))
        .route("/sessions/resume", post(resume_session))
        .route("/sessions/{id}", get(export_session).delete(delete_session))
        .route("/sessions/{id}/state", get(session_state))
        .route("/sessions/{id}/snapshot", get(session_snapshot))
        .route("/sessions/{id}/messages", post(session_message))
        .with_state(hub)
}

struct ApiError(SteerError);

impl From<SteerError> for ApiError {
    fn from(e: SteerError) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            SteerError::NotFound(_) => StatusCode::NOT_FOUND,
            SteerError::Closed(_) => StatusCode::GONE,
            SteerError::Core(armlift::Error::NotAtBasepoint { .. }) => StatusCode::CONFLICT,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        (status, Json(Outbound::error(&self.0))).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

#[derive(Deserialize)]
struct CreateBody {
    arm: ArmSpec,
    q0: Configuration,
    #[serde(default)]
    settings: Option<SessionSettings>,
}

async fn list_sessions(State(hub): State<Arc<Hub>>) -> Json<Vec<String>> {
    Json(hub.ids())
}

async fn create_session(State(hub): State<Arc<Hub>>, Json(body): Json<CreateBody>) -> ApiResult<Json<Vec<Outbound>>> {
    let mut current = None;
    Ok(Json(dispatch(&hub, &mut current, Inbound::Create { arm: body.arm, q0: body.q0, settings: body.settings }).await?))
}

async fn resume_session(State(hub): State<Arc<Hub>>, Json(session): Json<Session>) -> ApiResult<Json<Outbound>> {
    let h = hub.resume(session)?;
    Ok(Json(Outbound::Created { id: h.id().into() }))
}

async fn export_session(State(hub): State<Arc<Hub>>, Path(id): Path<String>) -> ApiResult<Json<Session>> {
    Ok(Json(hub.get(&id)?.export().await?))
}

async fn delete_session(State(hub): State<Arc<Hub>>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    hub.remove(&id).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn session_state(State(hub): State<Arc<Hub>>, Path(id): Path<String>) -> ApiResult<Json<Outbound>> {
    Ok(Json(Outbound::State(hub.get(&id)?.state().await?)))
}

async fn session_snapshot(State(hub): State<Arc<Hub>>, Path(id): Path<String>) -> ApiResult<Json<Outbound>> {
    let h = hub.get(&id)?;
    Ok(Json(Outbound::Holonomy { id, snapshot: h.snapshot().await? }))
}

async fn session_message(
    State(hub): State<Arc<Hub>>,
    Path(id): Path<String>,
    body: String,
) -> ApiResult<Json<Vec<Outbound>>> {
    let frame = parse_inbound(&body)?;
    let mut current = Some(hub.get(&id)?);
    Ok(Json(dispatch(&hub, &mut current, frame).await?))
}

async fn ws_upgrade(State(hub): State<Arc<Hub>>, ws: WebSocketUpgrade) -> Response {
    ws.on_upgrade(move |socket| connection(hub, socket))
}

fn forward(mut frames: broadcast::Receiver<String>, out: mpsc::UnboundedSender<String>) -> JoinHandle<()> {
    tokio::spawn(async move {
        loop {
            match frames.recv().await {
                Ok(text) => {
                    if out.send(text).is_err() {
                        break;
                    }
                }
                // A slow client skips frames rather than stalling the session.
                Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => break,
            }
        }
    })
}

async fn connection(hub: Arc<Hub>, socket: WebSocket) {
    let (mut sink, mut stream) = socket.split();
    let (out_tx, mut out_rx) = mpsc::unbounded_channel::<String>();
    let writer = tokio::spawn(async move {
        while let Some(text) = out_rx.recv().await {
            if sink.send(Message::Text(text.into())).await.is_err() {
                break;
            }
        }
    });

    let mut current: Option<SessionHandle> = None;
    let mut forwarder: Option<JoinHandle<()>> = None;
    while let Some(Ok(msg)) = stream.next().await {
        let text = match msg {
            Message::Text(t) => t.to_string(),
            Message::Close(_) => break,
            _ => continue,
        };
        let before = current.as_ref().map(|h| h.id().to_owned());
        // Subscribe to the new session before replying so no frame is missed.
        let replies = match parse_inbound(&text) {
            Ok(frame) => dispatch(&hub, &mut current, frame).await,
            Err(e) => Err(e),
        };
        let after = current.as_ref().map(|h| h.id().to_owned());
        if after != before {
            if let Some(f) = forwarder.take() {
                f.abort();
            }
            forwarder = current.as_ref().map(|h| forward(h.subscribe(), out_tx.clone()));
        }
        let replies = replies.unwrap_or_else(|e| vec![Outbound::error(&e)]);
        for r in replies {
            if out_tx.send(r.to_json()).is_err() {
                break;
            }
        }
    }
    if let Some(f) = forwarder {
        f.abort();
    }
    drop(out_tx);
    let _ = writer.await;
}

/// Bind and serve until the process ends.
pub async fn serve(config: crate::ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(config.address()).await?;
    serve_on(listener, Hub::new(config.session)).await
}

pub async fn serve_on(listener: tokio::net::TcpListener, hub: Arc<Hub>) -> std::io::Result<()> {
    axum::serve(listener, router(hub)).await
}
