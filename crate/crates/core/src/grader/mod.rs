//! The logic stage: evaluates a submission against a challenge body.
//!
//! Grading is binary. Every variant uses exact semantics (no partial credit);
//! anything beyond accept/reject is carried in [`Verdict::feedback`] and
//! [`Verdict::detail`].

mod normalize;
pub mod pattern;
mod rules;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ChallengeBody, ChallengeType, CodeUnit};

pub use normalize::normalize;
pub use pattern::{Pattern, PatternError};
pub use rules::{evaluate_rules, RuleError, RuleResult};

/// A player's answer. Index-valued submissions refer to the original
/// (unshuffled) body unless they came through [`crate::model::Presentation`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Submission {
    Scq { chosen_index: usize },
    Mcq { chosen_indices: BTreeSet<usize> },
    Teq { text: String },
    Csc { chosen_units: BTreeSet<CodeUnit> },
    Cec { code: String },
    Alr {
        #[serde(with = "crate::model::index_map")]
        proposed_map: BTreeMap<usize, usize>,
    },
}

impl Submission {
    pub fn challenge_type(&self) -> ChallengeType {
        match self {
            Submission::Scq { .. } => ChallengeType::Scq,
            Submission::Mcq { .. } => ChallengeType::Mcq,
            Submission::Teq { .. } => ChallengeType::Teq,
            Submission::Csc { .. } => ChallengeType::Csc,
            Submission::Cec { .. } => ChallengeType::Cec,
            Submission::Alr { .. } => ChallengeType::Alr,
        }
    }
}

/// Size of the difference between a selection and the key, without naming
/// which elements differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionDiff {
    pub missing: usize,
    pub extra: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub accepted: bool,
    #[serde(default)]
    pub feedback: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<SelectionDiff>,
}

impl Verdict {
    fn binary(accepted: bool) -> Verdict {
        Verdict {
            accepted,
            feedback: Vec::new(),
            detail: None,
        }
    }

    fn with_diff(accepted: bool, diff: SelectionDiff) -> Verdict {
        Verdict {
            accepted,
            feedback: Vec::new(),
            detail: (!accepted).then_some(diff),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GradeError {
    #[error("submission is {submitted} but the challenge is {expected}")]
    VariantMismatch {
        expected: ChallengeType,
        submitted: ChallengeType,
    },
    #[error("invalid submission: {0}")]
    InvalidSubmission(String),
    #[error(transparent)]
    Rule(#[from] RuleError),
}

fn set_diff<T: Ord>(chosen: &BTreeSet<T>, key: &BTreeSet<T>) -> SelectionDiff {
    SelectionDiff {
        missing: key.difference(chosen).count(),
        extra: chosen.difference(key).count(),
    }
}

fn check_indices<'a>(indices: impl IntoIterator<Item = &'a usize>, len: usize, what: &str) -> Result<(), GradeError> {
    match indices.into_iter().find(|&&i| i >= len) {
        Some(i) => Err(GradeError::InvalidSubmission(format!(
            "{what} index {i} out of range (0..{len})"
        ))),
        None => Ok(()),
    }
}

/// Grades `submission` against `body`. Pure: the same inputs always yield
/// the same verdict.
pub fn grade(body: &ChallengeBody, submission: &Submission) -> Result<Verdict, GradeError> {
    match (body, submission) {
        (ChallengeBody::Scq { options, correct_index, .. }, Submission::Scq { chosen_index }) => {
            check_indices([chosen_index], options.len(), "option")?;
            Ok(Verdict::binary(chosen_index == correct_index))
        }
        (ChallengeBody::Mcq { options, correct_indices, .. }, Submission::Mcq { chosen_indices }) => {
            check_indices(chosen_indices, options.len(), "option")?;
            Ok(Verdict::with_diff(
                chosen_indices == correct_indices,
                set_diff(chosen_indices, correct_indices),
            ))
        }
        (
            ChallengeBody::Teq {
                accepted_answers,
                normalization,
                ..
            },
            Submission::Teq { text },
        ) => {
            let answer = normalize(text, normalization);
            let accepted = accepted_answers
                .iter()
                .any(|a| normalize(a, normalization) == answer);
            Ok(Verdict::binary(accepted))
        }
        (
            ChallengeBody::Csc {
                selectable_units,
                correct_units,
                ..
            },
            Submission::Csc { chosen_units },
        ) => {
            if let Some(u) = chosen_units.iter().find(|u| !selectable_units.contains(u)) {
                return Err(GradeError::InvalidSubmission(format!("{u} is not selectable")));
            }
            Ok(Verdict::with_diff(
                chosen_units == correct_units,
                set_diff(chosen_units, correct_units),
            ))
        }
        (ChallengeBody::Cec { rule_set, .. }, Submission::Cec { code }) => {
            let results = evaluate_rules(rule_set, code)?;
            let feedback: Vec<String> = rule_set
                .iter()
                .zip(&results)
                .filter(|(_, r)| !r.passed)
                .map(|(rule, _)| rule.feedback.clone())
                .collect();
            Ok(Verdict {
                accepted: feedback.is_empty(),
                feedback,
                detail: None,
            })
        }
        (
            ChallengeBody::Alr {
                left,
                right,
                answer_map,
                ..
            },
            Submission::Alr { proposed_map },
        ) => {
            check_indices(proposed_map.keys(), left.len(), "left")?;
            check_indices(proposed_map.values(), right.len(), "right")?;
            if proposed_map.len() != left.len() {
                return Err(GradeError::InvalidSubmission(format!(
                    "every left item needs an association ({} of {} given)",
                    proposed_map.len(),
                    left.len()
                )));
            }
            let wrong = answer_map
                .iter()
                .filter(|(l, r)| proposed_map.get(l) != Some(r))
                .count();
            Ok(Verdict::with_diff(
                wrong == 0,
                SelectionDiff {
                    missing: wrong,
                    extra: wrong,
                },
            ))
        }
        (body, submission) => Err(GradeError::VariantMismatch {
            expected: body.challenge_type(),
            submitted: submission.challenge_type(),
        }),
    }
}
