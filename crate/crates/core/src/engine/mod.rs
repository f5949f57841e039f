//! One player's run through one challenge as an event-sourced state machine.
//!
//! Stages: an optional introduction (with an optional quiz), the challenge
//! itself, the logic stage that grades a submission, then one of the wrong
//! branches (return, explain and return, finish, explain and finish) or one
//! of the correct branches (concluding remarks with an optional extra
//! question, or finish straight away). A flag exists only for a solved
//! finish.
//!
//! Live actions ([`Session::submit`], [`Session::request_hint`],
//! [`Session::acknowledge`]) decide which events happen and then fold them in
//! through the same transition function [`Session::replay`] uses, so a log
//! always replays to the state that wrote it. Time is a logical clock in
//! seconds supplied by the caller; the engine never reads a wall clock.

mod event;
mod flag;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grader::{GradeError, Submission, Verdict};
use crate::model::{
    randomize_presentation, Challenge, ChallengeBody, CorrectBranchPolicy, HintKind, Presentation,
    WrongBranchPolicy,
};

pub use event::{parse_script_line, LoggedEvent, ScriptAction, ScriptStep, SessionEvent, WireError};
pub use flag::{derive_flag, FlagKey};

/// Explanation used when a return policy runs out of attempts and has no
/// explanation of its own.
pub const OUT_OF_ATTEMPTS: &str = "No attempts left for this challenge.";

// Offsets that give the intro quiz and the conclusion question their own
// shuffle, independent of the main body.
const INTRO_QUIZ_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;
const CONCLUSION_STREAM: u64 = 0xc2b2_ae3d_27d4_eb4f;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Solved,
    Unsolved,
}

/// Where an explanation leads once acknowledged. Finishing after an
/// explanation is always unsolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AfterExplanation {
    Challenge,
    Finished,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum StageState {
    Intro,
    IntroQuiz,
    Challenge,
    Explaining { text: String, next: AfterExplanation },
    ConclusionQuestion,
    Conclusion,
    Finished { outcome: Outcome },
}

impl StageState {
    pub fn tag(&self) -> &'static str {
        match self {
            StageState::Intro => "intro",
            StageState::IntroQuiz => "intro_quiz",
            StageState::Challenge => "challenge",
            StageState::Explaining { .. } => "explaining",
            StageState::ConclusionQuestion => "conclusion_question",
            StageState::Conclusion => "conclusion",
            StageState::Finished { .. } => "finished",
        }
    }

    pub fn is_finished(&self) -> bool {
        matches!(self, StageState::Finished { .. })
    }
}

impl fmt::Display for StageState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StageState::Intro => f.write_str("Intro"),
            StageState::IntroQuiz => f.write_str("IntroQuiz"),
            StageState::Challenge => f.write_str("Challenge"),
            StageState::Explaining { next, .. } => match next {
                AfterExplanation::Challenge => f.write_str("Explaining(next=Challenge)"),
                AfterExplanation::Finished => f.write_str("Explaining(next=Finished)"),
            },
            StageState::ConclusionQuestion => f.write_str("ConclusionQuestion"),
            StageState::Conclusion => f.write_str("Conclusion"),
            StageState::Finished { outcome: Outcome::Solved } => f.write_str("Finished(solved)"),
            StageState::Finished { outcome: Outcome::Unsolved } => f.write_str("Finished(unsolved)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("`{action}` is not allowed in stage {stage}")]
    WrongStage { action: &'static str, stage: String },
    #[error(transparent)]
    Grade(#[from] GradeError),
    #[error("session {session_id} belongs to challenge {expected}, not {given}")]
    ChallengeMismatch {
        session_id: String,
        expected: String,
        given: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("challenge is not solved")]
pub struct NotSolved;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("corrupt log at seq {seq}: {reason}")]
pub struct CorruptLog {
    pub seq: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrantedHint {
    pub hint_id: String,
    pub kind: HintKind,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    /// Points actually deducted (zero when hints are not penalized).
    pub charged: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum HintOutcome {
    Granted(GrantedHint),
    Locked { unlock: String },
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Session {
    pub session_id: String,
    pub player_id: String,
    pub challenge_id: String,
    pub stage: StageState,
    /// Challenge-stage submissions so far. While the player is still in the
    /// challenge stage every one of them was rejected.
    pub attempts: u32,
    pub hints_taken: Vec<String>,
    /// Caller-supplied start time (seconds since the Unix epoch).
    pub started_at: u64,
    /// Logical seconds since start; never decreases.
    pub clock: u64,
    pub score: u32,
    pub flag: Option<String>,
    pub seed: u64,
    pub last_verdict: Option<Verdict>,
    pub log: Vec<LoggedEvent>,
}

/// Score for the given progress. Exact integer arithmetic, clamped to
/// `[min_score, base_points]`; an unsolved finish scores the floor.
pub fn compute_score(challenge: &Challenge, session: &Session) -> u32 {
    let policy = &challenge.score_policy;
    if session.stage == (StageState::Finished { outcome: Outcome::Unsolved }) {
        return policy.min_score;
    }
    let mut deduction: u64 = 0;
    if policy.penalize_hints {
        deduction += session
            .hints_taken
            .iter()
            .filter_map(|id| challenge.hint(id))
            .map(|h| u64::from(h.cost))
            .sum::<u64>();
    }
    if policy.penalize_retries {
        deduction += u64::from(policy.retry_penalty) * u64::from(session.attempts.saturating_sub(1));
    }
    let raw = u64::from(challenge.base_points).saturating_sub(deduction);
    raw.max(u64::from(policy.min_score)) as u32
}

/// Flag for a solved session.
pub fn issue_flag(session: &Session, key: &FlagKey) -> Result<String, NotSolved> {
    match session.stage {
        StageState::Finished { outcome: Outcome::Solved } => {
            Ok(derive_flag(key, &session.session_id, &session.challenge_id))
        }
        _ => Err(NotSolved),
    }
}

fn redacted(mut verdict: Verdict, reveal_detail: bool) -> Verdict {
    if !reveal_detail {
        verdict.detail = None;
    }
    verdict
}

impl Session {
    pub fn start(challenge: &Challenge, session_id: &str, player_id: &str, seed: u64, started_at: u64) -> Session {
        let stage = if challenge.intro.is_some() {
            StageState::Intro
        } else {
            StageState::Challenge
        };
        Session {
            session_id: session_id.to_string(),
            player_id: player_id.to_string(),
            challenge_id: challenge.id.clone(),
            stage,
            attempts: 0,
            hints_taken: Vec::new(),
            started_at,
            clock: 0,
            score: challenge.base_points,
            flag: None,
            seed,
            last_verdict: None,
            log: vec![LoggedEvent {
                seq: 0,
                logical_clock: 0,
                event: SessionEvent::Started {
                    seed,
                    player_id: player_id.to_string(),
                    challenge_id: challenge.id.clone(),
                    started_at,
                },
            }],
        }
    }

    /// Sequence number the next event will get.
    pub fn next_seq(&self) -> u64 {
        self.log.len() as u64
    }

    /// The question the player interacts with in the current stage, if any.
    pub fn active_question<'c>(&self, challenge: &'c Challenge) -> Option<(&'c ChallengeBody, u64)> {
        match self.stage {
            StageState::IntroQuiz => challenge
                .intro
                .as_ref()
                .and_then(|i| i.quiz.as_ref())
                .map(|q| (q, self.seed.wrapping_add(INTRO_QUIZ_STREAM))),
            StageState::Challenge => Some((&challenge.body, self.seed)),
            StageState::ConclusionQuestion => match &challenge.correct_branch {
                CorrectBranchPolicy::ConcludeThenFinish {
                    additional_question: Some(q),
                } => Some((q, self.seed.wrapping_add(CONCLUSION_STREAM))),
                _ => None,
            },
            _ => None,
        }
    }

    /// Shuffled, key-free rendering of the current question.
    pub fn presentation(&self, challenge: &Challenge) -> Option<Presentation> {
        self.active_question(challenge)
            .map(|(body, seed)| randomize_presentation(body, seed))
    }

    /// False only when the stage reached Finished but the Finished event is
    /// not in the log, as after a write torn between the two.
    pub fn is_settled(&self) -> bool {
        !self.stage.is_finished() || self.finished_logged()
    }

    fn finished_logged(&self) -> bool {
        matches!(self.log.last(), Some(LoggedEvent { event: SessionEvent::Finished { .. }, .. }))
    }

    fn wrong_stage(&self, action: &'static str) -> SessionError {
        SessionError::WrongStage {
            action,
            stage: self.stage.to_string(),
        }
    }

    fn check_challenge(&self, challenge: &Challenge) -> Result<(), SessionError> {
        if challenge.id != self.challenge_id {
            return Err(SessionError::ChallengeMismatch {
                session_id: self.session_id.clone(),
                expected: self.challenge_id.clone(),
                given: challenge.id.clone(),
            });
        }
        Ok(())
    }

    /// Grades `submission` (in presented order) in the current question stage.
    pub fn submit(
        &mut self,
        challenge: &Challenge,
        submission: &Submission,
        now: u64,
        key: &FlagKey,
    ) -> Result<Verdict, SessionError> {
        self.check_challenge(challenge)?;
        let Some((body, seed)) = self.active_question(challenge) else {
            return Err(self.wrong_stage("answer"));
        };
        let verdict = randomize_presentation(body, seed).grade(body, submission)?;
        let clock = self.clock.max(now);
        let event = match self.stage {
            StageState::IntroQuiz => SessionEvent::IntroQuizAnswered {
                submission: submission.clone(),
                verdict,
            },
            StageState::Challenge => {
                let reveal = !self.wrong_branch_returns(challenge, verdict.accepted, self.attempts + 1);
                SessionEvent::Answered {
                    submission: submission.clone(),
                    verdict: redacted(verdict, reveal),
                }
            }
            _ => SessionEvent::ConclusionAnswered {
                submission: submission.clone(),
                verdict,
            },
        };
        self.record(challenge, clock, event);
        self.finish_if_pending(challenge, key);
        Ok(self.last_verdict.clone().expect("answer events set last_verdict"))
    }

    /// Hands out the first hint not yet taken whose unlock rule holds.
    pub fn request_hint(&mut self, challenge: &Challenge, now: u64) -> Result<HintOutcome, SessionError> {
        self.check_challenge(challenge)?;
        if self.stage != StageState::Challenge {
            return Err(self.wrong_stage("hint"));
        }
        let clock = self.clock.max(now);
        let mut untaken = challenge
            .hints
            .iter()
            .filter(|h| !self.hints_taken.contains(&h.hint_id))
            .peekable();
        let Some(first_untaken) = untaken.peek().copied() else {
            return Ok(HintOutcome::Exhausted);
        };
        let Some(hint) = untaken.find(|h| h.unlock.is_unlocked(clock, self.attempts)) else {
            return Ok(HintOutcome::Locked {
                unlock: first_untaken.unlock.describe(clock, self.attempts),
            });
        };
        let granted = GrantedHint {
            hint_id: hint.hint_id.clone(),
            kind: hint.kind,
            text: hint.text.clone(),
            url: hint.url.clone(),
            charged: if challenge.score_policy.penalize_hints { hint.cost } else { 0 },
        };
        self.record(
            challenge,
            clock,
            SessionEvent::HintRequested {
                hint_id: hint.hint_id.clone(),
                cost: hint.cost,
            },
        );
        Ok(HintOutcome::Granted(granted))
    }

    /// Moves past an intro, an explanation or the concluding remarks.
    pub fn acknowledge(&mut self, challenge: &Challenge, now: u64, key: &FlagKey) -> Result<(), SessionError> {
        self.check_challenge(challenge)?;
        let clock = self.clock.max(now);
        match self.stage {
            StageState::Intro => self.record(challenge, clock, SessionEvent::IntroAcknowledged),
            StageState::Explaining { .. } => self.record(challenge, clock, SessionEvent::ExplanationShown),
            // leaving the conclusion has no event of its own besides Finished
            StageState::Conclusion => {
                self.clock = clock;
                self.stage = StageState::Finished { outcome: Outcome::Solved };
            }
            _ => return Err(self.wrong_stage("ack")),
        }
        self.finish_if_pending(challenge, key);
        Ok(())
    }

    fn wrong_branch_returns(&self, challenge: &Challenge, accepted: bool, attempts_after: u32) -> bool {
        !accepted && challenge.wrong_branch.returns_to_challenge() && !self.out_of_attempts(challenge, attempts_after)
    }

    fn out_of_attempts(&self, challenge: &Challenge, attempts: u32) -> bool {
        challenge.wrong_branch.max_attempts().is_some_and(|max| attempts >= max)
    }

    /// Appends the Finished event once the stage reached Finished.
    fn finish_if_pending(&mut self, challenge: &Challenge, key: &FlagKey) {
        if let StageState::Finished { outcome } = self.stage {
            if !self.finished_logged() {
                let flag = issue_flag(self, key).ok();
                let score = compute_score(challenge, self);
                let clock = self.clock;
                self.record(challenge, clock, SessionEvent::Finished { outcome, score, flag });
            }
        }
    }

    fn record(&mut self, challenge: &Challenge, clock: u64, event: SessionEvent) {
        let logged = LoggedEvent {
            seq: self.next_seq(),
            logical_clock: clock,
            event,
        };
        if let Err(reason) = self.apply(challenge, &logged) {
            unreachable!("engine produced an illegal event: {reason}");
        }
    }

    /// The transition function shared by live play and replay.
    fn apply(&mut self, challenge: &Challenge, logged: &LoggedEvent) -> Result<(), String> {
        if self.finished_logged() {
            return Err("event after finish".into());
        }
        if logged.seq != self.next_seq() {
            return Err(format!("expected seq {}", self.next_seq()));
        }
        if logged.logical_clock < self.clock {
            return Err(format!("clock went back from {} to {}", self.clock, logged.logical_clock));
        }
        let stage_err = |what: &str, stage: &StageState| format!("{what} in stage {stage}");
        let regrade = |session: &Session, submission: &Submission| -> Result<Verdict, String> {
            let (body, seed) = session
                .active_question(challenge)
                .ok_or_else(|| "no question in this stage".to_string())?;
            randomize_presentation(body, seed)
                .grade(body, submission)
                .map_err(|e| e.to_string())
        };
        let check_verdict = |recorded: &Verdict, fresh: &Verdict| {
            if recorded == fresh {
                Ok(())
            } else {
                Err("recorded verdict does not match the grader".to_string())
            }
        };

        self.clock = logged.logical_clock;
        match &logged.event {
            SessionEvent::Started { .. } => return Err("duplicate start".into()),
            SessionEvent::IntroAcknowledged => {
                if self.stage != StageState::Intro {
                    return Err(stage_err("intro acknowledgement", &self.stage));
                }
                let has_quiz = challenge.intro.as_ref().is_some_and(|i| i.quiz.is_some());
                self.stage = if has_quiz {
                    StageState::IntroQuiz
                } else {
                    StageState::Challenge
                };
            }
            SessionEvent::IntroQuizAnswered { submission, verdict } => {
                if self.stage != StageState::IntroQuiz {
                    return Err(stage_err("intro quiz answer", &self.stage));
                }
                check_verdict(verdict, &regrade(self, submission)?)?;
                let gating = challenge.intro.as_ref().is_some_and(|i| i.gating);
                if verdict.accepted || !gating {
                    self.stage = StageState::Challenge;
                }
                self.last_verdict = Some(verdict.clone());
            }
            SessionEvent::HintRequested { hint_id, cost } => {
                if self.stage != StageState::Challenge {
                    return Err(stage_err("hint", &self.stage));
                }
                let hint = challenge
                    .hint(hint_id)
                    .ok_or_else(|| format!("unknown hint {hint_id}"))?;
                if self.hints_taken.contains(hint_id) {
                    return Err(format!("hint {hint_id} taken twice"));
                }
                if !hint.unlock.is_unlocked(self.clock, self.attempts) {
                    return Err(format!("hint {hint_id} was still locked"));
                }
                if hint.cost != *cost {
                    return Err(format!("hint {hint_id} costs {}, log says {cost}", hint.cost));
                }
                self.hints_taken.push(hint_id.clone());
                self.score = compute_score(challenge, self);
            }
            SessionEvent::Answered { submission, verdict } => {
                if self.stage != StageState::Challenge {
                    return Err(stage_err("answer", &self.stage));
                }
                let fresh = regrade(self, submission)?;
                self.attempts += 1;
                let reveal = !self.wrong_branch_returns(challenge, fresh.accepted, self.attempts);
                check_verdict(verdict, &redacted(fresh, reveal))?;
                self.stage = if verdict.accepted {
                    match &challenge.correct_branch {
                        CorrectBranchPolicy::ConcludeThenFinish {
                            additional_question: Some(_),
                        } => StageState::ConclusionQuestion,
                        CorrectBranchPolicy::ConcludeThenFinish { additional_question: None } => {
                            StageState::Conclusion
                        }
                        CorrectBranchPolicy::Finish => StageState::Finished { outcome: Outcome::Solved },
                    }
                } else if self.out_of_attempts(challenge, self.attempts) {
                    StageState::Explaining {
                        text: challenge
                            .wrong_branch
                            .explanation()
                            .unwrap_or(OUT_OF_ATTEMPTS)
                            .to_string(),
                        next: AfterExplanation::Finished,
                    }
                } else {
                    match &challenge.wrong_branch {
                        WrongBranchPolicy::ReturnToChallenge { .. } => StageState::Challenge,
                        WrongBranchPolicy::ExplainThenReturn { explanation, .. } => StageState::Explaining {
                            text: explanation.clone(),
                            next: AfterExplanation::Challenge,
                        },
                        WrongBranchPolicy::ProceedToFinish => StageState::Finished {
                            outcome: Outcome::Unsolved,
                        },
                        WrongBranchPolicy::ExplainThenFinish { explanation } => StageState::Explaining {
                            text: explanation.clone(),
                            next: AfterExplanation::Finished,
                        },
                    }
                };
                self.last_verdict = Some(verdict.clone());
                self.score = compute_score(challenge, self);
            }
            SessionEvent::ExplanationShown => {
                let StageState::Explaining { next, .. } = &self.stage else {
                    return Err(stage_err("explanation acknowledgement", &self.stage));
                };
                self.stage = match next {
                    AfterExplanation::Challenge => StageState::Challenge,
                    AfterExplanation::Finished => StageState::Finished {
                        outcome: Outcome::Unsolved,
                    },
                };
            }
            SessionEvent::ConclusionAnswered { submission, verdict } => {
                if self.stage != StageState::ConclusionQuestion {
                    return Err(stage_err("conclusion answer", &self.stage));
                }
                check_verdict(verdict, &regrade(self, submission)?)?;
                self.stage = StageState::Conclusion;
                self.last_verdict = Some(verdict.clone());
            }
            SessionEvent::Finished { outcome, score, flag } => {
                match (&self.stage, outcome) {
                    (StageState::Conclusion, Outcome::Solved) => {
                        self.stage = StageState::Finished { outcome: Outcome::Solved };
                    }
                    (StageState::Finished { outcome: reached }, o) if reached == o => {}
                    (stage, _) => return Err(stage_err("finish", stage)),
                }
                if flag.is_some() != (*outcome == Outcome::Solved) {
                    return Err("flag must be present exactly for a solved finish".into());
                }
                let expected = compute_score(challenge, self);
                if *score != expected {
                    return Err(format!("final score {score} but progress gives {expected}"));
                }
                self.score = expected;
                self.flag = flag.clone();
            }
        }
        self.log.push(logged.clone());
        Ok(())
    }

    /// Rebuilds a session from its log. The result equals the live session
    /// that wrote the log, field for field.
    pub fn replay(session_id: &str, events: &[LoggedEvent], challenge: &Challenge) -> Result<Session, CorruptLog> {
        let corrupt = |seq: u64, reason: String| CorruptLog { seq, reason };
        let (first, rest) = events
            .split_first()
            .ok_or_else(|| corrupt(0, "empty log".into()))?;
        let SessionEvent::Started {
            seed,
            player_id,
            challenge_id,
            started_at,
        } = &first.event
        else {
            return Err(corrupt(first.seq, format!("log starts with {}", first.event.event_type())));
        };
        if first.seq != 0 || first.logical_clock != 0 {
            return Err(corrupt(first.seq, "start must have seq 0 and clock 0".into()));
        }
        if challenge_id != &challenge.id {
            return Err(corrupt(0, format!("log is for challenge {challenge_id}, not {}", challenge.id)));
        }
        let mut session = Session::start(challenge, session_id, player_id, *seed, *started_at);
        for logged in rest {
            session
                .apply(challenge, logged)
                .map_err(|reason| corrupt(logged.seq, reason))?;
        }
        Ok(session)
    }
}
