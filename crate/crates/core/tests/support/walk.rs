//! Random legal (and some illegal) action sequences over a challenge, with
//! the session invariants checked after every step.

use std::collections::{BTreeMap, BTreeSet};

use ctf_core::engine::derive_flag;
use ctf_core::model::{CorrectBranchPolicy, Presentation, ScorePolicy, WrongBranchPolicy};
use ctf_core::{Challenge, ChallengeBody, FlagKey, HintOutcome, Outcome, Session, SessionError, StageState, Submission};
use rand::seq::IndexedRandom;
use rand::Rng;

/// Copy of `base` with randomized scoring, wrong-branch, correct-branch and
/// gating settings.
pub fn policy_variant(base: &Challenge, rng: &mut impl Rng) -> Challenge {
    let mut ch = base.clone();
    ch.score_policy = ScorePolicy {
        penalize_hints: rng.random_bool(0.5),
        penalize_retries: rng.random_bool(0.5),
        retry_penalty: rng.random_range(0..=30),
        min_score: rng.random_range(0..=ch.base_points / 2),
    };
    let max_attempts = if rng.random_bool(0.5) {
        None
    } else {
        Some(rng.random_range(1..=4))
    };
    ch.wrong_branch = match rng.random_range(0..4) {
        0 => WrongBranchPolicy::ReturnToChallenge { max_attempts },
        1 => WrongBranchPolicy::ExplainThenReturn {
            explanation: "Not quite; look again.".into(),
            max_attempts,
        },
        2 => WrongBranchPolicy::ProceedToFinish,
        _ => WrongBranchPolicy::ExplainThenFinish {
            explanation: "That answer misses the weakness.".into(),
        },
    };
    if rng.random_bool(0.3) {
        ch.correct_branch = CorrectBranchPolicy::Finish;
    }
    if let Some(intro) = ch.intro.as_mut() {
        intro.gating = rng.random_bool(0.5);
    }
    ch
}

fn presented_position(p: &Presentation, original: usize) -> usize {
    match &p.remap {
        Some(remap) => remap
            .presented_to_original
            .iter()
            .position(|&o| o == original)
            .expect("remap is a permutation"),
        None => original,
    }
}

/// Maps an original-order submission onto the presented order.
pub fn to_presented(p: &Presentation, submission: Submission) -> Submission {
    match submission {
        Submission::Scq { chosen_index } => Submission::Scq {
            chosen_index: presented_position(p, chosen_index),
        },
        Submission::Mcq { chosen_indices } => Submission::Mcq {
            chosen_indices: chosen_indices.into_iter().map(|i| presented_position(p, i)).collect(),
        },
        Submission::Alr { proposed_map } => Submission::Alr {
            proposed_map: proposed_map
                .into_iter()
                .map(|(l, r)| (l, presented_position(p, r)))
                .collect(),
        },
        other => other,
    }
}

/// An accepted submission in original order.
pub fn correct_answer(body: &ChallengeBody) -> Submission {
    match body {
        ChallengeBody::Scq { correct_index, .. } => Submission::Scq {
            chosen_index: *correct_index,
        },
        ChallengeBody::Mcq { correct_indices, .. } => Submission::Mcq {
            chosen_indices: correct_indices.clone(),
        },
        ChallengeBody::Teq { accepted_answers, .. } => Submission::Teq {
            text: format!("  {}  ", accepted_answers[0].to_uppercase()),
        },
        ChallengeBody::Csc { correct_units, .. } => Submission::Csc {
            chosen_units: correct_units.clone(),
        },
        ChallengeBody::Cec { fixtures, .. } => Submission::Cec {
            code: fixtures.known_good[0].clone(),
        },
        ChallengeBody::Alr { answer_map, .. } => Submission::Alr {
            proposed_map: answer_map.clone(),
        },
    }
}

/// A rejected submission in original order.
pub fn wrong_answer(body: &ChallengeBody, rng: &mut impl Rng) -> Submission {
    match body {
        ChallengeBody::Scq {
            options, correct_index, ..
        } => Submission::Scq {
            chosen_index: (correct_index + rng.random_range(1..options.len())) % options.len(),
        },
        ChallengeBody::Mcq { correct_indices, .. } => {
            let mut chosen = correct_indices.clone();
            let drop = *chosen.iter().next().expect("at least two correct answers");
            chosen.remove(&drop);
            Submission::Mcq { chosen_indices: chosen }
        }
        ChallengeBody::Teq { .. } => Submission::Teq {
            text: "no idea".into(),
        },
        ChallengeBody::Csc { .. } => Submission::Csc {
            chosen_units: BTreeSet::new(),
        },
        ChallengeBody::Cec { starter_code, .. } => Submission::Cec {
            code: starter_code.clone(),
        },
        ChallengeBody::Alr { right, answer_map, .. } => {
            let mut proposed: BTreeMap<usize, usize> = answer_map.clone();
            let first = proposed.get_mut(&0).expect("left list is non-empty");
            *first = (*first + 1) % right.len();
            Submission::Alr { proposed_map: proposed }
        }
    }
}

/// Score by definition, in signed arithmetic.
pub fn reference_score(ch: &Challenge, session: &Session) -> u32 {
    let p = &ch.score_policy;
    if session.stage == (StageState::Finished { outcome: Outcome::Unsolved }) {
        return p.min_score;
    }
    let mut score = i64::from(ch.base_points);
    if p.penalize_hints {
        for id in &session.hints_taken {
            score -= i64::from(ch.hint(id).expect("taken hints exist").cost);
        }
    }
    if p.penalize_retries && session.attempts > 0 {
        score -= i64::from(p.retry_penalty) * (i64::from(session.attempts) - 1);
    }
    score.max(i64::from(p.min_score)) as u32
}

#[derive(Debug)]
pub struct Walk {
    pub session: Session,
    pub scores: Vec<u32>,
    pub hints_granted: usize,
    pub illegal_rejected: usize,
}

#[derive(Clone, Copy)]
enum Action {
    Ack,
    Hint,
    Correct,
    Wrong,
}

fn perform(s: &mut Session, ch: &Challenge, key: &FlagKey, action: Action, now: u64, rng: &mut impl Rng) -> Result<bool, SessionError> {
    match action {
        Action::Ack => s.acknowledge(ch, now, key).map(|_| false),
        Action::Hint => s.request_hint(ch, now).map(|o| matches!(o, HintOutcome::Granted(_))),
        Action::Correct | Action::Wrong => {
            let Some(p) = s.presentation(ch) else {
                // any submission will do; the stage has no question
                return s
                    .submit(ch, &Submission::Teq { text: String::new() }, now, key)
                    .map(|_| false);
            };
            let (body, _) = s.active_question(ch).expect("presentation implies a question");
            let original = match action {
                Action::Correct => correct_answer(body),
                _ => wrong_answer(body, rng),
            };
            s.submit(ch, &to_presented(&p, original), now, key).map(|_| false)
        }
    }
}

fn legal_actions(stage: &StageState) -> &'static [Action] {
    match stage {
        StageState::Intro | StageState::Explaining { .. } | StageState::Conclusion => &[Action::Ack],
        StageState::IntroQuiz | StageState::ConclusionQuestion => &[Action::Correct, Action::Wrong],
        StageState::Challenge => &[Action::Hint, Action::Hint, Action::Correct, Action::Wrong, Action::Wrong],
        StageState::Finished { .. } => &[],
    }
}

fn illegal_action(stage: &StageState) -> Action {
    match stage {
        StageState::Challenge => Action::Ack,
        StageState::Intro | StageState::Explaining { .. } | StageState::Conclusion => Action::Correct,
        _ => Action::Hint,
    }
}

/// Drives a session to completion (or `max_steps`) and checks after every
/// step: score non-increasing and within `[min_score, base_points]`, score
/// equal to the reference, attempts and hints monotone, hints unique, flag
/// present iff solved, and illegal actions rejected without any effect.
pub fn random_walk(ch: &Challenge, key: &FlagKey, seed: u64, rng: &mut impl Rng) -> Result<Walk, String> {
    let mut s = Session::start(ch, &format!("walk-{seed}"), "walker", seed, 1_700_000_000);
    let mut walk_scores = vec![s.score];
    let mut hints_granted = 0;
    let mut illegal_rejected = 0;
    let policy = ch.score_policy;
    for step in 0..200 {
        if s.stage.is_finished() {
            break;
        }
        let now = s.clock + rng.random_range(0..40);
        if rng.random_bool(0.1) {
            let before = s.clone();
            let illegal = illegal_action(&s.stage);
            match perform(&mut s, ch, key, illegal, now, rng) {
                Err(SessionError::WrongStage { .. }) if s == before => illegal_rejected += 1,
                other => return Err(format!("step {step}: illegal action gave {other:?}")),
            }
        }
        let before = s.clone();
        let action = *legal_actions(&s.stage).choose(rng).expect("unfinished stage has actions");
        let granted = perform(&mut s, ch, key, action, now, rng).map_err(|e| format!("step {step}: {e}"))?;
        hints_granted += usize::from(granted);

        if s.score > before.score {
            return Err(format!("step {step}: score rose {} -> {}", before.score, s.score));
        }
        if s.score < policy.min_score || s.score > ch.base_points {
            return Err(format!("step {step}: score {} out of range", s.score));
        }
        if s.score != reference_score(ch, &s) {
            return Err(format!("step {step}: score {} but reference {}", s.score, reference_score(ch, &s)));
        }
        if s.attempts < before.attempts || s.hints_taken.len() < before.hints_taken.len() {
            return Err(format!("step {step}: progress went backwards"));
        }
        if !s.hints_taken.starts_with(&before.hints_taken) {
            return Err(format!("step {step}: taken hints rewritten"));
        }
        if s.hints_taken.iter().collect::<BTreeSet<_>>().len() != s.hints_taken.len() {
            return Err(format!("step {step}: duplicate hint"));
        }
        let solved = s.stage == (StageState::Finished { outcome: Outcome::Solved });
        if s.flag.is_some() != solved {
            return Err(format!("step {step}: flag {:?} in stage {}", s.flag, s.stage));
        }
        if let Some(flag) = &s.flag {
            if *flag != derive_flag(key, &s.session_id, &ch.id) {
                return Err(format!("step {step}: unexpected flag"));
            }
        }
        walk_scores.push(s.score);
    }
    if s.stage.is_finished() {
        for action in [Action::Ack, Action::Hint, Action::Correct] {
            let before = s.clone();
            let now = s.clock + 1;
            match perform(&mut s, ch, key, action, now, rng) {
                Err(SessionError::WrongStage { .. }) if s == before => {}
                other => return Err(format!("finished session accepted an action: {other:?}")),
            }
        }
    }
    Ok(Walk {
        session: s,
        scores: walk_scores,
        hints_granted,
        illegal_rejected,
    })
}
