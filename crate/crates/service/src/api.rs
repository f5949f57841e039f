//! The `/api/v1` routes.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{FromRequestParts, Path, State};
use axum::http::request::Parts;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use ctf_core::view::{player_view, PlayerView};
use ctf_core::{Challenge, GradeError, HintOutcome, Session, SessionError, Submission};
use rand::Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;

use crate::scoreboard::{scoreboard, ScoreboardEntry};
use crate::{finish_record, App};

type AppState = Arc<App>;

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> ApiError {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    fn not_found(what: &str) -> ApiError {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("{what} not found"))
    }

    fn conflict(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::CONFLICT, "conflict", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.code.to_string(),
            message: self.message,
        };
        (self.status, Json(body)).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> ApiError {
        let code = match e {
            SessionError::WrongStage { .. } => "wrong_stage",
            SessionError::Grade(GradeError::VariantMismatch { .. }) => "wrong_variant",
            SessionError::Grade(_) => "invalid_submission",
            SessionError::ChallengeMismatch { .. } => "wrong_challenge",
        };
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, e.to_string())
    }
}

/// The authenticated player.
pub struct Player(pub String);

impl FromRequestParts<AppState> for Player {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, app: &AppState) -> Result<Self, Self::Rejection> {
        let unauthorized = |m: &str| ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", m);
        let value = parts
            .headers
            .get(header::AUTHORIZATION)
            .ok_or_else(|| unauthorized("missing bearer token"))?;
        let token = value
            .to_str()
            .ok()
            .and_then(|v| v.strip_prefix("Bearer "))
            .ok_or_else(|| unauthorized("expected `Authorization: Bearer <token>`"))?;
        app.tokens
            .get(token.trim())
            .map(|p| Player(p.clone()))
            .ok_or_else(|| unauthorized("unknown token"))
    }
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    let bytes: &[u8] = if body.iter().all(u8::is_ascii_whitespace) { b"{}" } else { body };
    serde_json::from_slice(bytes).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "malformed", e.to_string()))
}

#[derive(Debug, Deserialize)]
struct CreateSession {
    challenge_id: String,
}

#[derive(Debug, Deserialize)]
struct AnswerRequest {
    submission: Submission,
    /// Expected next sequence number; a mismatch is a conflict.
    #[serde(default)]
    seq: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
struct ActionRequest {
    #[serde(default)]
    seq: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session_id: String,
    pub view: PlayerView,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AnswerResponse {
    /// `accepted` or `rejected`.
    pub verdict: String,
    pub view: PlayerView,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct HintResponse {
    pub hint: HintOutcome,
    /// Points deducted for a granted hint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<u32>,
    pub view: PlayerView,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ViewResponse {
    pub view: PlayerView,
}

pub fn router(app: AppState) -> Router {
    Router::new()
        .route("/api/v1/health", get(health))
        .route("/api/v1/challenges", get(list_challenges))
        .route("/api/v1/sessions", post(create_session))
        .route("/api/v1/sessions/{id}", get(get_session))
        .route("/api/v1/sessions/{id}/answer", post(answer))
        .route("/api/v1/sessions/{id}/hint", post(hint))
        .route("/api/v1/sessions/{id}/ack", post(ack))
        .route("/api/v1/scoreboard", get(get_scoreboard))
        .fallback(|| async { ApiError::not_found("route") })
        .with_state(app)
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({"status": "ok"}))
}

async fn list_challenges(State(app): State<AppState>, _: Player) -> Json<Vec<crate::ChallengeSummary>> {
    Json(app.summaries.clone())
}

async fn create_session(
    State(app): State<AppState>,
    Player(player): Player,
    body: Bytes,
) -> Result<Response, ApiError> {
    let req: CreateSession = parse(&body)?;
    let ch = app
        .challenges
        .get(&req.challenge_id)
        .ok_or_else(|| ApiError::not_found("challenge"))?;
    let mut owners = app.owners.lock().await;
    let owner_key = (player.clone(), ch.id.clone());
    if let Some(id) = owners.get(&owner_key) {
        let session = app.session(id)?;
        let s = session.lock().await;
        let created = SessionCreated {
            session_id: id.clone(),
            view: player_view(&s, ch),
        };
        return Ok((StatusCode::OK, Json(created)).into_response());
    }
    let (session_id, seed) = {
        let mut rng = rand::rng();
        (format!("{:032x}", rng.random::<u128>()), rng.random::<u64>())
    };
    let session = Session::start(ch, &session_id, &player, seed, app.clock.now());
    app.persist(&session_id, &session.log).await?;
    let view = player_view(&session, ch);
    app.sessions
        .write()
        .expect("session index poisoned")
        .insert(session_id.clone(), Arc::new(Mutex::new(session)));
    owners.insert(owner_key, session_id.clone());
    Ok((StatusCode::CREATED, Json(SessionCreated { session_id, view })).into_response())
}

async fn get_session(
    State(app): State<AppState>,
    Player(player): Player,
    Path(id): Path<String>,
) -> Result<Json<PlayerView>, ApiError> {
    let session = app.session(&id)?;
    let s = session.lock().await;
    // sessions of other players are reported as unknown
    if s.player_id != player {
        return Err(ApiError::not_found("session"));
    }
    Ok(Json(player_view(&s, app.challenge_of(&s))))
}

async fn answer(
    State(app): State<AppState>,
    Player(player): Player,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<AnswerResponse>, ApiError> {
    let req: AnswerRequest = parse(&body)?;
    let key = &app.key;
    let (verdict, view) = app
        .act(&id, &player, req.seq, |s, ch, now| s.submit(ch, &req.submission, now, key))
        .await?;
    let verdict = if verdict.accepted { "accepted" } else { "rejected" };
    Ok(Json(AnswerResponse {
        verdict: verdict.to_string(),
        view,
    }))
}

async fn hint(
    State(app): State<AppState>,
    Player(player): Player,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<HintResponse>, ApiError> {
    let req: ActionRequest = parse(&body)?;
    let (hint, view) = app
        .act(&id, &player, req.seq, |s, ch, now| s.request_hint(ch, now))
        .await?;
    let cost = match &hint {
        HintOutcome::Granted(g) => Some(g.charged),
        _ => None,
    };
    Ok(Json(HintResponse { hint, cost, view }))
}

async fn ack(
    State(app): State<AppState>,
    Player(player): Player,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<ViewResponse>, ApiError> {
    let req: ActionRequest = parse(&body)?;
    let key = &app.key;
    let ((), view) = app
        .act(&id, &player, req.seq, |s, ch, now| s.acknowledge(ch, now, key))
        .await?;
    Ok(Json(ViewResponse { view }))
}

async fn get_scoreboard(State(app): State<AppState>, _: Player) -> Json<Vec<ScoreboardEntry>> {
    let finished = app.finished.read().expect("scoreboard poisoned");
    Json(scoreboard(finished.values()))
}

impl App {
    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .expect("session index poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("session"))
    }

    fn challenge_of(&self, session: &Session) -> &Challenge {
        self.challenges
            .get(&session.challenge_id)
            .expect("sessions only exist for loaded challenges")
    }

    async fn persist(&self, session_id: &str, events: &[ctf_core::LoggedEvent]) -> Result<(), ApiError> {
        let store = self.store.clone();
        let id = session_id.to_string();
        let events = events.to_vec();
        let written = tokio::task::spawn_blocking(move || store.append(&id, &events)).await;
        match written {
            Ok(Ok(())) => Ok(()),
            Ok(Err(e)) => Err(ApiError::new(
                StatusCode::SERVICE_UNAVAILABLE,
                "storage_unavailable",
                format!("could not store the event: {e}"),
            )),
            Err(e) => Err(ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "storage_unavailable", e.to_string())),
        }
    }

    /// Runs `action` on a copy of the session, stores the new events and
    /// commits the copy. A busy session or a stale `seq` is a conflict.
    async fn act<T>(
        &self,
        id: &str,
        player: &str,
        expected_seq: Option<u64>,
        action: impl FnOnce(&mut Session, &Challenge, u64) -> Result<T, SessionError>,
    ) -> Result<(T, PlayerView), ApiError> {
        let session = self.session(id)?;
        let mut guard = session
            .try_lock()
            .map_err(|_| ApiError::conflict("another request for this session is in progress"))?;
        if guard.player_id != player {
            return Err(ApiError::not_found("session"));
        }
        if let Some(seq) = expected_seq {
            if seq != guard.next_seq() {
                return Err(ApiError::conflict(format!(
                    "session is at seq {}, request expected {seq}",
                    guard.next_seq()
                )));
            }
        }
        let ch = self.challenge_of(&guard);
        let mut next = guard.clone();
        let now = self.clock.now().saturating_sub(next.started_at);
        let result = action(&mut next, ch, now)?;
        let new_events = &next.log[guard.log.len()..];
        if !new_events.is_empty() {
            self.persist(id, new_events).await?;
        }
        let view = player_view(&next, ch);
        if let Some(r) = finish_record(&next).filter(|_| !guard.stage.is_finished()) {
            self.finished.write().expect("scoreboard poisoned").insert(id.to_string(), r);
        }
        *guard = next;
        Ok((result, view))
    }
}
