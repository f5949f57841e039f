//! HTTP service for playing challenge packs.
//!
//! Every session is an append-only event log on disk. Actions are applied
//! to a copy of the session, the new events are synced, and only then is
//! the copy committed and the response sent. On startup every log is
//! replayed.

pub mod api;
pub mod clock;
pub mod config;
pub mod scoreboard;
pub mod store;

use std::collections::{BTreeMap, HashMap};
use std::io;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use ctf_core::model::lint_pack;
use ctf_core::{parse_pack, Challenge, ChallengeType, FlagKey, PackError, Session, SessionEvent};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::sync::Mutex;

use crate::clock::Clock;
use crate::config::{Config, SECRET_ENV};
use crate::scoreboard::FinishRecord;
use crate::store::EventStore;

pub use api::router;

#[derive(Debug, Error)]
pub enum StartupError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{}: {error}", path.display())]
    Pack { path: PathBuf, error: PackError },
    #[error("challenge id `{0}` appears in more than one pack")]
    DuplicateChallenge(String),
    #[error("no server secret configured: set `secret` in the config file or {SECRET_ENV}")]
    MissingSecret,
    #[error("no player tokens configured")]
    NoTokens,
    #[error("storage: {0}")]
    Storage(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChallengeSummary {
    pub id: String,
    pub title: String,
    #[serde(rename = "type")]
    pub challenge_type: ChallengeType,
    pub base_points: u32,
    pub pack_id: String,
}

/// Everything a request handler needs.
pub struct App {
    challenges: HashMap<String, Challenge>,
    summaries: Vec<ChallengeSummary>,
    key: FlagKey,
    tokens: HashMap<String, String>,
    clock: Arc<dyn Clock>,
    store: Arc<dyn EventStore>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    /// (player, challenge) to session id; also serializes session creation.
    owners: Mutex<HashMap<(String, String), String>>,
    /// Finished sessions, updated in the same step that commits the session.
    finished: RwLock<BTreeMap<String, FinishRecord>>,
    /// Log lines dropped at startup because a crash cut them short.
    pub recovered_partial: usize,
}

/// Loaded packs, ready to be combined with a store and a clock.
pub struct Content {
    pub packs: Vec<(String, Vec<Challenge>)>,
    pub warnings: Vec<String>,
}

pub fn load_packs(paths: &[PathBuf]) -> Result<Content, StartupError> {
    let mut packs = Vec::new();
    let mut warnings = Vec::new();
    for path in paths {
        let text = std::fs::read_to_string(path).map_err(|source| StartupError::Io {
            path: path.clone(),
            source,
        })?;
        let pack = parse_pack(&text).map_err(|error| StartupError::Pack {
            path: path.clone(),
            error,
        })?;
        warnings.extend(lint_pack(&pack).iter().map(|f| format!("{}: {f}", path.display())));
        packs.push((pack.pack_id, pack.challenges));
    }
    Ok(Content { packs, warnings })
}

fn finish_record(session: &Session) -> Option<FinishRecord> {
    session.log.iter().rev().find_map(|e| match &e.event {
        SessionEvent::Finished { outcome, score, .. } => Some(FinishRecord {
            player_id: session.player_id.clone(),
            challenge_id: session.challenge_id.clone(),
            outcome: *outcome,
            score: *score,
            at: session.started_at + e.logical_clock,
        }),
        _ => None,
    })
}

impl App {
    /// Builds the service state and replays every stored session.
    pub fn new(
        content: Content,
        secret: Option<&str>,
        tokens: BTreeMap<String, String>,
        store: Arc<dyn EventStore>,
        clock: Arc<dyn Clock>,
    ) -> Result<App, StartupError> {
        let key = secret.and_then(FlagKey::new).ok_or(StartupError::MissingSecret)?;
        if tokens.is_empty() {
            return Err(StartupError::NoTokens);
        }
        let mut challenges = HashMap::new();
        let mut summaries = Vec::new();
        for (pack_id, list) in content.packs {
            for ch in list {
                if challenges.contains_key(&ch.id) {
                    return Err(StartupError::DuplicateChallenge(ch.id));
                }
                summaries.push(ChallengeSummary {
                    id: ch.id.clone(),
                    title: ch.title.clone(),
                    challenge_type: ch.body.challenge_type(),
                    base_points: ch.base_points,
                    pack_id: pack_id.clone(),
                });
                challenges.insert(ch.id.clone(), ch);
            }
        }

        let mut sessions = HashMap::new();
        let mut owners = HashMap::new();
        let mut finished = BTreeMap::new();
        let mut recovered_partial = 0;
        let logs = store.load_all().map_err(|e| StartupError::Storage(e.to_string()))?;
        for (session_id, mut events) in logs {
            let challenge_id = match events.first().map(|e| &e.event) {
                Some(SessionEvent::Started { challenge_id, .. }) => challenge_id.clone(),
                _ => return Err(StartupError::Storage(format!("session {session_id}: log does not begin with started"))),
            };
            let ch = challenges
                .get(&challenge_id)
                .ok_or_else(|| StartupError::Storage(format!("session {session_id}: unknown challenge {challenge_id}")))?;
            let mut session = Session::replay(&session_id, &events, ch)
                .map_err(|e| StartupError::Storage(format!("session {session_id}: {e}")))?;
            // an action's events are written together; drop a batch cut short
            let mut dropped = 0;
            while !session.is_settled() {
                events.pop();
                dropped += 1;
                session = Session::replay(&session_id, &events, ch)
                    .map_err(|e| StartupError::Storage(format!("session {session_id}: {e}")))?;
            }
            if dropped > 0 {
                recovered_partial += dropped;
                store
                    .truncate(&session_id, events.len())
                    .map_err(|e| StartupError::Storage(e.to_string()))?;
            }
            owners.insert((session.player_id.clone(), challenge_id), session_id.clone());
            if let Some(r) = finish_record(&session) {
                finished.insert(session_id.clone(), r);
            }
            sessions.insert(session_id, Arc::new(Mutex::new(session)));
        }

        Ok(App {
            challenges,
            summaries,
            key,
            tokens: tokens.into_iter().collect(),
            clock,
            store,
            sessions: RwLock::new(sessions),
            owners: Mutex::new(owners),
            finished: RwLock::new(finished),
            recovered_partial,
        })
    }

    pub fn from_config(config: &Config, clock: Arc<dyn Clock>) -> Result<App, StartupError> {
        let content = load_packs(&config.packs)?;
        for w in &content.warnings {
            eprintln!("{w}");
        }
        if config.secret.as_deref().is_none_or(str::is_empty) {
            return Err(StartupError::MissingSecret);
        }
        let store = store::FileStore::open(&config.storage_dir).map_err(|source| StartupError::Io {
            path: config.storage_dir.clone(),
            source,
        })?;
        App::new(
            content,
            config.secret.as_deref(),
            config.tokens.clone(),
            Arc::new(store),
            clock,
        )
    }

    pub fn summaries(&self) -> &[ChallengeSummary] {
        &self.summaries
    }

    /// Rebuilds the scoreboard records from the stored logs, independently
    /// of the in-memory state.
    pub fn finish_records_from_store(&self) -> io::Result<Vec<FinishRecord>> {
        let mut out = Vec::new();
        for (session_id, events) in self.store.load_all()? {
            let Some(SessionEvent::Started { challenge_id, .. }) = events.first().map(|e| &e.event) else {
                continue;
            };
            let Some(ch) = self.challenges.get(challenge_id) else { continue };
            if let Ok(s) = Session::replay(&session_id, &events, ch) {
                out.extend(finish_record(&s));
            }
        }
        Ok(out)
    }
}

/// Loads everything from `config`, binds, prints `listening on <addr>` and
/// serves until interrupted.
pub async fn serve(config: Config) -> Result<(), StartupError> {
    let app = App::from_config(&config, Arc::new(clock::SystemClock))?;
    let addr = format!("{}:{}", config.bind, config.port);
    let listener = tokio::net::TcpListener::bind(&addr)
        .await
        .map_err(|e| StartupError::Config(format!("cannot bind {addr}: {e}")))?;
    let local = listener
        .local_addr()
        .map_err(|e| StartupError::Config(e.to_string()))?;
    println!("listening on {local}");
    axum::serve(listener, router(Arc::new(app)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| StartupError::Config(e.to_string()))
}
