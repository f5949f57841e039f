//! Session events and their JSON-lines wire form.
//!
//! Each line is one object with `event_type`, `session_id`, `seq`,
//! `payload` and `logical_clock`. Dry-run scripts use the same lines; there
//! `session_id`, `seq` and `logical_clock` may be omitted and answer events
//! need no `verdict`.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use super::Outcome;
use crate::grader::{Submission, Verdict};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event_type", content = "payload", rename_all = "snake_case")]
pub enum SessionEvent {
    Started {
        seed: u64,
        player_id: String,
        challenge_id: String,
        started_at: u64,
    },
    IntroAcknowledged,
    IntroQuizAnswered {
        submission: Submission,
        verdict: Verdict,
    },
    HintRequested {
        hint_id: String,
        cost: u32,
    },
    Answered {
        submission: Submission,
        verdict: Verdict,
    },
    ExplanationShown,
    ConclusionAnswered {
        submission: Submission,
        verdict: Verdict,
    },
    Finished {
        outcome: Outcome,
        score: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        flag: Option<String>,
    },
}

impl SessionEvent {
    pub fn event_type(&self) -> &'static str {
        match self {
            SessionEvent::Started { .. } => "started",
            SessionEvent::IntroAcknowledged => "intro_acknowledged",
            SessionEvent::IntroQuizAnswered { .. } => "intro_quiz_answered",
            SessionEvent::HintRequested { .. } => "hint_requested",
            SessionEvent::Answered { .. } => "answered",
            SessionEvent::ExplanationShown => "explanation_shown",
            SessionEvent::ConclusionAnswered { .. } => "conclusion_answered",
            SessionEvent::Finished { .. } => "finished",
        }
    }
}

/// An event with its position in the session log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoggedEvent {
    pub seq: u64,
    pub logical_clock: u64,
    pub event: SessionEvent,
}

#[derive(Debug, Error)]
pub enum WireError {
    #[error("malformed event line: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed event line: {0}")]
    Shape(String),
}

fn take_object(line: &str) -> Result<Map<String, Value>, WireError> {
    match serde_json::from_str::<Value>(line)? {
        Value::Object(map) => Ok(map),
        _ => Err(WireError::Shape("expected a JSON object".into())),
    }
}

fn take_u64(map: &mut Map<String, Value>, field: &str) -> Result<Option<u64>, WireError> {
    match map.remove(field) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v
            .as_u64()
            .map(Some)
            .ok_or_else(|| WireError::Shape(format!("`{field}` must be a non-negative integer"))),
    }
}

fn decode_event(event_type: Value, payload: Option<Value>) -> Result<SessionEvent, WireError> {
    let mut tagged = Map::new();
    tagged.insert("event_type".into(), event_type);
    match payload {
        // unit events are written with an empty payload object
        Some(Value::Object(p)) if p.is_empty() => {}
        None | Some(Value::Null) => {}
        Some(p) => {
            tagged.insert("payload".into(), p);
        }
    }
    Ok(serde_json::from_value(Value::Object(tagged))?)
}

impl LoggedEvent {
    pub fn to_json_line(&self, session_id: &str) -> String {
        let tagged = serde_json::to_value(&self.event).expect("events always serialize");
        let payload = tagged
            .get("payload")
            .cloned()
            .unwrap_or_else(|| Value::Object(Map::new()));
        let line = serde_json::json!({
            "event_type": self.event.event_type(),
            "session_id": session_id,
            "seq": self.seq,
            "payload": payload,
            "logical_clock": self.logical_clock,
        });
        line.to_string()
    }

    /// Parses one log line, returning the session id it belongs to.
    pub fn from_json_line(line: &str) -> Result<(String, LoggedEvent), WireError> {
        let mut map = take_object(line)?;
        let session_id = match map.remove("session_id") {
            Some(Value::String(s)) => s,
            _ => return Err(WireError::Shape("`session_id` must be a string".into())),
        };
        let seq = take_u64(&mut map, "seq")?.ok_or_else(|| WireError::Shape("missing `seq`".into()))?;
        let logical_clock =
            take_u64(&mut map, "logical_clock")?.ok_or_else(|| WireError::Shape("missing `logical_clock`".into()))?;
        let event_type = map
            .remove("event_type")
            .ok_or_else(|| WireError::Shape("missing `event_type`".into()))?;
        let event = decode_event(event_type, map.remove("payload"))?;
        Ok((
            session_id,
            LoggedEvent {
                seq,
                logical_clock,
                event,
            },
        ))
    }
}

/// A player action extracted from a script line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScriptAction {
    Answer(Submission),
    Hint,
    Acknowledge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptStep {
    pub action: ScriptAction,
    pub logical_clock: Option<u64>,
}

/// Reads one dry-run script line. `started` and `finished` lines are
/// engine output rather than actions and yield `None`, so a recorded log can
/// be fed back as a script. Besides the logged event types, the shorthands
/// `answer`, `hint` and `ack` are accepted.
pub fn parse_script_line(line: &str) -> Result<Option<ScriptStep>, WireError> {
    let mut map = take_object(line)?;
    let logical_clock = take_u64(&mut map, "logical_clock")?;
    let event_type = match map.remove("event_type") {
        Some(Value::String(s)) => s,
        _ => return Err(WireError::Shape("`event_type` must be a string".into())),
    };
    let payload = map.remove("payload").unwrap_or(Value::Null);
    let action = match event_type.as_str() {
        "started" | "finished" => return Ok(None),
        "intro_acknowledged" | "explanation_shown" | "ack" => ScriptAction::Acknowledge,
        "hint_requested" | "hint" => ScriptAction::Hint,
        "answered" | "intro_quiz_answered" | "conclusion_answered" | "answer" => {
            let submission = payload
                .get("submission")
                .cloned()
                .ok_or_else(|| WireError::Shape("answer needs `payload.submission`".into()))?;
            ScriptAction::Answer(serde_json::from_value(submission)?)
        }
        other => return Err(WireError::Shape(format!("unknown event_type `{other}`"))),
    };
    Ok(Some(ScriptStep { action, logical_clock }))
}
