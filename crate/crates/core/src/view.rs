//! The player-facing projection of a session. Built only from presented
//! bodies, so answer keys, rule sets and fixtures cannot appear in it.

use serde::{Deserialize, Serialize};

use crate::engine::{Outcome, Session, StageState};
use crate::grader::Verdict;
use crate::model::{Challenge, ChallengeType, HintKind, PresentedBody};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TakenHint {
    pub hint_id: String,
    pub kind: HintKind,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HintStatus {
    pub total: usize,
    /// Hints that can be requested right now.
    pub unlocked: usize,
    pub taken: Vec<TakenHint>,
    /// Unlock condition of the next hint when none can be requested now.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub next_unlock: Option<String>,
    /// Cost of the hint a request would return now.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub next_cost: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerView {
    pub session_id: String,
    pub challenge_id: String,
    pub title: String,
    pub challenge_type: ChallengeType,
    pub stage: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<Outcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intro_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guiding_question: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<PresentedBody>,
    pub hints: HintStatus,
    pub attempts: u32,
    pub score: u32,
    pub base_points: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explanation: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub references: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_verdict: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
    /// Sequence number the next event will get; clients echo it back for
    /// optimistic concurrency.
    pub seq: u64,
}

pub fn player_view(session: &Session, challenge: &Challenge) -> PlayerView {
    let presentation = session.presentation(challenge);
    let in_challenge = session.stage == StageState::Challenge;
    let untaken: Vec<_> = challenge
        .hints
        .iter()
        .filter(|h| !session.hints_taken.contains(&h.hint_id))
        .collect();
    let unlocked: Vec<_> = untaken
        .iter()
        .filter(|h| h.unlock.is_unlocked(session.clock, session.attempts))
        .collect();
    let hints = HintStatus {
        total: challenge.hints.len(),
        unlocked: if in_challenge { unlocked.len() } else { 0 },
        taken: session
            .hints_taken
            .iter()
            .filter_map(|id| challenge.hint(id))
            .map(|h| TakenHint {
                hint_id: h.hint_id.clone(),
                kind: h.kind,
                text: h.text.clone(),
                url: h.url.clone(),
            })
            .collect(),
        next_unlock: match (in_challenge, unlocked.is_empty(), untaken.first()) {
            (true, true, Some(h)) => Some(h.unlock.describe(session.clock, session.attempts)),
            _ => None,
        },
        next_cost: unlocked.first().filter(|_| in_challenge).map(|h| {
            if challenge.score_policy.penalize_hints {
                h.cost
            } else {
                0
            }
        }),
    };

    let conclusion = Some(challenge.conclusion.explanation.clone()).filter(|e| !e.is_empty());
    let (explanation, references) = match &session.stage {
        StageState::Explaining { text, .. } => (Some(text.clone()), Vec::new()),
        StageState::Conclusion | StageState::Finished { .. } => {
            (conclusion, challenge.conclusion.references.clone())
        }
        _ => (None, Vec::new()),
    };

    PlayerView {
        session_id: session.session_id.clone(),
        challenge_id: challenge.id.clone(),
        title: challenge.title.clone(),
        challenge_type: challenge.body.challenge_type(),
        stage: session.stage.tag().to_string(),
        outcome: match session.stage {
            StageState::Finished { outcome } => Some(outcome),
            _ => None,
        },
        intro_text: match session.stage {
            StageState::Intro | StageState::IntroQuiz => challenge.intro.as_ref().map(|i| i.text.clone()),
            _ => None,
        },
        guiding_question: presentation.as_ref().map(|p| p.body.guiding_question().to_string()),
        body: presentation.map(|p| p.body),
        hints,
        attempts: session.attempts,
        score: session.score,
        base_points: challenge.base_points,
        explanation,
        references,
        last_verdict: session.last_verdict.clone(),
        flag: session.flag.clone(),
        seq: session.next_seq(),
    }
}
