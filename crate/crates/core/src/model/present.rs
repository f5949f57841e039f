//! What the player sees: a challenge body with its answer key stripped and,
//! for choice and association bodies, a seeded shuffle of the options.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Cardinality, ChallengeBody, CodeUnit, PromptMode};
use crate::grader::{grade, GradeError, Submission, Verdict};

/// Answer-key-free view of a [`ChallengeBody`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum PresentedBody {
    Scq {
        guiding_question: String,
        options: Vec<String>,
    },
    Mcq {
        guiding_question: String,
        options: Vec<String>,
    },
    Teq {
        guiding_question: String,
    },
    Csc {
        guiding_question: String,
        code: String,
        selectable_units: Vec<CodeUnit>,
        prompt_mode: PromptMode,
    },
    Cec {
        guiding_question: String,
        starter_code: String,
    },
    Alr {
        guiding_question: String,
        left: Vec<String>,
        right: Vec<String>,
        cardinality: Cardinality,
    },
}

impl PresentedBody {
    pub fn guiding_question(&self) -> &str {
        match self {
            PresentedBody::Scq { guiding_question, .. }
            | PresentedBody::Mcq { guiding_question, .. }
            | PresentedBody::Teq { guiding_question }
            | PresentedBody::Csc { guiding_question, .. }
            | PresentedBody::Cec { guiding_question, .. }
            | PresentedBody::Alr { guiding_question, .. } => guiding_question,
        }
    }
}

/// `presented_to_original[p]` is the original index shown at position `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexRemap {
    pub presented_to_original: Vec<usize>,
}

impl IndexRemap {
    fn original(&self, presented: usize) -> Result<usize, GradeError> {
        self.presented_to_original.get(presented).copied().ok_or_else(|| {
            GradeError::InvalidSubmission(format!(
                "index {presented} out of range (0..{})",
                self.presented_to_original.len()
            ))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    pub body: PresentedBody,
    /// Present for SCQ/MCQ (options) and ALR (right list).
    pub remap: Option<IndexRemap>,
}

impl Presentation {
    /// Translates a submission made against the presented order back to the
    /// original indices.
    pub fn to_original(&self, submission: &Submission) -> Result<Submission, GradeError> {
        let Some(remap) = &self.remap else {
            return Ok(submission.clone());
        };
        Ok(match submission {
            Submission::Scq { chosen_index } => Submission::Scq {
                chosen_index: remap.original(*chosen_index)?,
            },
            Submission::Mcq { chosen_indices } => Submission::Mcq {
                chosen_indices: chosen_indices
                    .iter()
                    .map(|&i| remap.original(i))
                    .collect::<Result<_, _>>()?,
            },
            Submission::Alr { proposed_map } => Submission::Alr {
                proposed_map: proposed_map
                    .iter()
                    .map(|(&l, &r)| Ok((l, remap.original(r)?)))
                    .collect::<Result<_, GradeError>>()?,
            },
            other => other.clone(),
        })
    }

    /// Grades a presented-order submission against the original body.
    pub fn grade(&self, body: &ChallengeBody, submission: &Submission) -> Result<Verdict, GradeError> {
        if body.challenge_type() != submission.challenge_type() {
            return Err(GradeError::VariantMismatch {
                expected: body.challenge_type(),
                submitted: submission.challenge_type(),
            });
        }
        grade(body, &self.to_original(submission)?)
    }
}

fn shuffled(len: usize, seed: u64) -> IndexRemap {
    let mut order: Vec<usize> = (0..len).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    IndexRemap {
        presented_to_original: order,
    }
}

fn permute(items: &[String], remap: &IndexRemap) -> Vec<String> {
    remap.presented_to_original.iter().map(|&i| items[i].clone()).collect()
}

/// Strips the answer key and shuffles options (SCQ/MCQ) or the right-hand
/// list (ALR) with a permutation fixed by `seed`.
pub fn randomize_presentation(body: &ChallengeBody, seed: u64) -> Presentation {
    match body {
        ChallengeBody::Scq {
            guiding_question,
            options,
            ..
        } => {
            let remap = shuffled(options.len(), seed);
            Presentation {
                body: PresentedBody::Scq {
                    guiding_question: guiding_question.clone(),
                    options: permute(options, &remap),
                },
                remap: Some(remap),
            }
        }
        ChallengeBody::Mcq {
            guiding_question,
            options,
            ..
        } => {
            let remap = shuffled(options.len(), seed);
            Presentation {
                body: PresentedBody::Mcq {
                    guiding_question: guiding_question.clone(),
                    options: permute(options, &remap),
                },
                remap: Some(remap),
            }
        }
        ChallengeBody::Alr {
            guiding_question,
            left,
            right,
            cardinality,
            ..
        } => {
            let remap = shuffled(right.len(), seed);
            Presentation {
                body: PresentedBody::Alr {
                    guiding_question: guiding_question.clone(),
                    left: left.clone(),
                    right: permute(right, &remap),
                    cardinality: *cardinality,
                },
                remap: Some(remap),
            }
        }
        ChallengeBody::Teq { guiding_question, .. } => Presentation {
            body: PresentedBody::Teq {
                guiding_question: guiding_question.clone(),
            },
            remap: None,
        },
        ChallengeBody::Csc {
            guiding_question,
            code,
            selectable_units,
            prompt_mode,
            ..
        } => Presentation {
            body: PresentedBody::Csc {
                guiding_question: guiding_question.clone(),
                code: code.clone(),
                selectable_units: selectable_units.clone(),
                prompt_mode: *prompt_mode,
            },
            remap: None,
        },
        ChallengeBody::Cec {
            guiding_question,
            starter_code,
            ..
        } => Presentation {
            body: PresentedBody::Cec {
                guiding_question: guiding_question.clone(),
                starter_code: starter_code.clone(),
            },
            remap: None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn scq(options: &[&str]) -> ChallengeBody {
        ChallengeBody::Scq {
            guiding_question: "q".into(),
            options: options.iter().map(|s| s.to_string()).collect(),
            correct_index: 0,
        }
    }

    fn options_of(p: &Presentation) -> Vec<String> {
        match &p.body {
            PresentedBody::Scq { options, .. } | PresentedBody::Mcq { options, .. } => options.clone(),
            PresentedBody::Alr { right, .. } => right.clone(),
            _ => panic!("no options"),
        }
    }

    #[test]
    fn same_seed_same_order() {
        let body = scq(&["A", "B", "C", "D"]);
        assert_eq!(randomize_presentation(&body, 42), randomize_presentation(&body, 42));
    }

    #[test]
    fn all_three_option_permutations_occur_over_a_thousand_seeds() {
        let body = scq(&["A", "B", "C"]);
        let seen: HashSet<Vec<String>> = (0..1000)
            .map(|seed| options_of(&randomize_presentation(&body, seed)))
            .collect();
        assert_eq!(seen.len(), 6);
    }

    #[test]
    fn code_bodies_pass_through() {
        let body = ChallengeBody::Teq {
            guiding_question: "q".into(),
            accepted_answers: vec!["secret".into()],
            normalization: Default::default(),
        };
        let p = randomize_presentation(&body, 3);
        assert!(p.remap.is_none());
        assert!(!serde_json::to_string(&p.body).unwrap().contains("secret"));
    }

    #[test]
    fn out_of_range_presented_index() {
        let body = scq(&["A", "B"]);
        let p = randomize_presentation(&body, 0);
        assert!(p.grade(&body, &Submission::Scq { chosen_index: 2 }).is_err());
    }

    proptest! {
        #[test]
        fn presented_options_are_a_permutation(n in 2usize..9, seed in any::<u64>()) {
            let options: Vec<String> = (0..n).map(|i| format!("opt-{i}")).collect();
            let body = ChallengeBody::Mcq {
                guiding_question: "q".into(),
                options: options.clone(),
                correct_indices: [0, 1].into(),
            };
            let p = randomize_presentation(&body, seed);
            let mut shown = options_of(&p);
            for (pos, &orig) in p.remap.as_ref().unwrap().presented_to_original.iter().enumerate() {
                prop_assert_eq!(&shown[pos], &options[orig]);
            }
            shown.sort();
            let mut sorted = options.clone();
            sorted.sort();
            prop_assert_eq!(shown, sorted);
        }
    }
}
