//! Small-body enumeration and brute-force reference graders.
//!
//! The reference graders work on bitmasks and pair sets and never call into
//! the crate's grader, so they are independent of it.

use std::collections::{BTreeMap, BTreeSet};

use ctf_core::model::{randomize_presentation, Cardinality, CodeUnit, PresentedBody};
use ctf_core::{grade, ChallengeBody, Submission};

pub struct Case {
    pub body: ChallengeBody,
    pub submissions: Vec<Submission>,
}

fn options(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("option-{i}")).collect()
}

fn mask_to_set(mask: u32) -> BTreeSet<usize> {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}

fn set_to_mask(set: &BTreeSet<usize>) -> u32 {
    set.iter().fold(0, |m, &i| m | (1 << i))
}

/// Every map `[0, n) -> [0, m)`, as vectors indexed by the left item.
fn all_maps(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..m).map(move |r| {
                    let mut v = prefix.clone();
                    v.push(r);
                    v
                })
            })
            .collect();
    }
    out
}

fn is_permutation(map: &[usize]) -> bool {
    map.iter().collect::<BTreeSet<_>>().len() == map.len()
}

fn to_btree(map: &[usize]) -> BTreeMap<usize, usize> {
    map.iter().copied().enumerate().collect()
}

fn csc_units(n: usize) -> Vec<CodeUnit> {
    let mut units: Vec<CodeUnit> = (1..=n as u32).map(CodeUnit::Line).collect();
    if n >= 2 {
        units[1] = CodeUnit::Expr { line: 2, start: 0, end: 3 };
    }
    units
}

pub fn scq_cases() -> Vec<Case> {
    let mut cases = Vec::new();
    for n in 2..=4 {
        for correct_index in 0..n {
            cases.push(Case {
                body: ChallengeBody::Scq {
                    guiding_question: "q".into(),
                    options: options(n),
                    correct_index,
                },
                submissions: (0..n).map(|chosen_index| Submission::Scq { chosen_index }).collect(),
            });
        }
    }
    cases
}

pub fn mcq_cases() -> Vec<Case> {
    let mut cases = Vec::new();
    for n in 2..=4usize {
        let all = 1u32 << n;
        for key in (0..all).filter(|k| k.count_ones() >= 2) {
            cases.push(Case {
                body: ChallengeBody::Mcq {
                    guiding_question: "q".into(),
                    options: options(n),
                    correct_indices: mask_to_set(key),
                },
                submissions: (0..all)
                    .map(|m| Submission::Mcq {
                        chosen_indices: mask_to_set(m),
                    })
                    .collect(),
            });
        }
    }
    cases
}

pub fn csc_cases() -> Vec<Case> {
    let mut cases = Vec::new();
    for n in 1..=4usize {
        let units = csc_units(n);
        let pick = |mask: u32| -> BTreeSet<CodeUnit> { mask_to_set(mask).into_iter().map(|i| units[i]).collect() };
        let all = 1u32 << n;
        for key in 1..all {
            cases.push(Case {
                body: ChallengeBody::Csc {
                    guiding_question: "q".into(),
                    code: "abcd\nefgh\nijkl\nmnop\n".into(),
                    selectable_units: units.clone(),
                    correct_units: pick(key),
                    prompt_mode: ctf_core::model::PromptMode::FindVulnerability,
                    guideline: None,
                },
                submissions: (0..all).map(|m| Submission::Csc { chosen_units: pick(m) }).collect(),
            });
        }
    }
    cases
}

/// All answer maps for up to three items, bijective ones for four.
pub fn alr_cases() -> Vec<Case> {
    let mut cases = Vec::new();
    for n in 1..=4usize {
        let maps = all_maps(n, n);
        for key in maps.iter().filter(|m| n < 4 || is_permutation(m)) {
            cases.push(Case {
                body: ChallengeBody::Alr {
                    guiding_question: "q".into(),
                    left: (0..n).map(|i| format!("left-{i}")).collect(),
                    right: (0..n).map(|i| format!("right-{i}")).collect(),
                    answer_map: to_btree(key),
                    cardinality: if is_permutation(key) {
                        Cardinality::Bijective
                    } else {
                        Cardinality::ManyToOne
                    },
                },
                submissions: maps
                    .iter()
                    .map(|m| Submission::Alr {
                        proposed_map: to_btree(m),
                    })
                    .collect(),
            });
        }
    }
    cases
}

pub fn all_cases() -> Vec<Case> {
    let mut cases = scq_cases();
    cases.extend(mcq_cases());
    cases.extend(csc_cases());
    cases.extend(alr_cases());
    cases
}

/// Accepted iff the submitted selection equals the key as a set (SCQ, MCQ,
/// CSC), or the submitted relation equals the key relation (ALR).
pub fn reference_accepts(body: &ChallengeBody, submission: &Submission) -> bool {
    match (body, submission) {
        (ChallengeBody::Scq { correct_index, .. }, Submission::Scq { chosen_index }) => {
            (1u32 << correct_index) ^ (1u32 << chosen_index) == 0
        }
        (ChallengeBody::Mcq { correct_indices, .. }, Submission::Mcq { chosen_indices }) => {
            set_to_mask(correct_indices) ^ set_to_mask(chosen_indices) == 0
        }
        (
            ChallengeBody::Csc {
                selectable_units,
                correct_units,
                ..
            },
            Submission::Csc { chosen_units },
        ) => {
            let mask = |set: &BTreeSet<CodeUnit>| -> u32 {
                selectable_units
                    .iter()
                    .enumerate()
                    .filter(|(_, u)| set.contains(u))
                    .fold(0, |m, (i, _)| m | (1 << i))
            };
            mask(correct_units) ^ mask(chosen_units) == 0
        }
        (ChallengeBody::Alr { answer_map, .. }, Submission::Alr { proposed_map }) => {
            let pairs = |m: &BTreeMap<usize, usize>| -> u64 { m.iter().fold(0, |acc, (l, r)| acc | 1 << (l * 8 + r)) };
            pairs(answer_map) == pairs(proposed_map)
        }
        _ => panic!("reference grader called with mismatched variants"),
    }
}

/// Missing and extra counts for the selection variants.
pub fn reference_diff(body: &ChallengeBody, submission: &Submission) -> Option<(usize, usize)> {
    let (key, chosen) = match (body, submission) {
        (ChallengeBody::Mcq { correct_indices, .. }, Submission::Mcq { chosen_indices }) => {
            (set_to_mask(correct_indices), set_to_mask(chosen_indices))
        }
        (
            ChallengeBody::Csc {
                selectable_units,
                correct_units,
                ..
            },
            Submission::Csc { chosen_units },
        ) => {
            let mask = |set: &BTreeSet<CodeUnit>| -> u32 {
                selectable_units
                    .iter()
                    .enumerate()
                    .filter(|(_, u)| set.contains(u))
                    .fold(0, |m, (i, _)| m | (1 << i))
            };
            (mask(correct_units), mask(chosen_units))
        }
        _ => return None,
    };
    Some(((key & !chosen).count_ones() as usize, (chosen & !key).count_ones() as usize))
}

#[derive(Debug, Default)]
pub struct Tally {
    pub cases: usize,
    pub disagreements: Vec<String>,
}

/// Grades every enumerated submission with the crate grader and compares
/// against the reference.
pub fn check_grader(cases: &[Case]) -> Tally {
    let mut tally = Tally::default();
    for case in cases {
        for sub in &case.submissions {
            tally.cases += 1;
            let verdict = match grade(&case.body, sub) {
                Ok(v) => v,
                Err(e) => {
                    tally.disagreements.push(format!("{sub:?}: error {e}"));
                    continue;
                }
            };
            let expected = reference_accepts(&case.body, sub);
            if verdict.accepted != expected {
                tally
                    .disagreements
                    .push(format!("{:?} / {sub:?}: got {}, want {expected}", case.body, verdict.accepted));
            }
            if let (false, Some((missing, extra))) = (expected, reference_diff(&case.body, sub)) {
                let got = verdict.detail.map(|d| (d.missing, d.extra));
                if got != Some((missing, extra)) {
                    tally
                        .disagreements
                        .push(format!("{sub:?}: diff {got:?}, want {:?}", (missing, extra)));
                }
            }
        }
    }
    tally
}

/// Original index of each presented item, recovered by text. Items are
/// distinct in every enumerated body.
fn recover_by_text(original: &[String], presented: &[String]) -> Vec<usize> {
    presented
        .iter()
        .map(|p| original.iter().position(|o| o == p).expect("presented item comes from the body"))
        .collect()
}

fn translate(body: &ChallengeBody, presented: &PresentedBody, submission: &Submission) -> Submission {
    match (body, presented, submission) {
        (ChallengeBody::Scq { options, .. }, PresentedBody::Scq { options: shown, .. }, Submission::Scq { chosen_index }) => {
            Submission::Scq {
                chosen_index: recover_by_text(options, shown)[*chosen_index],
            }
        }
        (ChallengeBody::Mcq { options, .. }, PresentedBody::Mcq { options: shown, .. }, Submission::Mcq { chosen_indices }) => {
            let back = recover_by_text(options, shown);
            Submission::Mcq {
                chosen_indices: chosen_indices.iter().map(|&i| back[i]).collect(),
            }
        }
        (ChallengeBody::Alr { right, .. }, PresentedBody::Alr { right: shown, .. }, Submission::Alr { proposed_map }) => {
            let back = recover_by_text(right, shown);
            Submission::Alr {
                proposed_map: proposed_map.iter().map(|(&l, &r)| (l, back[r])).collect(),
            }
        }
        _ => submission.clone(),
    }
}

fn presented_items(presented: &PresentedBody) -> Vec<String> {
    match presented {
        PresentedBody::Scq { options, .. } | PresentedBody::Mcq { options, .. } => options.clone(),
        PresentedBody::Alr { right, .. } => right.clone(),
        _ => Vec::new(),
    }
}

fn original_items(body: &ChallengeBody) -> Vec<String> {
    match body {
        ChallengeBody::Scq { options, .. } | ChallengeBody::Mcq { options, .. } => options.clone(),
        ChallengeBody::Alr { right, .. } => right.clone(),
        _ => Vec::new(),
    }
}

/// For every seed: the presentation is a permutation, it is reproducible,
/// and grading a presented-order submission through the remap agrees with
/// the reference grader applied to the text-recovered original submission.
pub fn check_randomization(cases: &[Case], seeds: impl Iterator<Item = u64> + Clone) -> Tally {
    let mut tally = Tally::default();
    for case in cases {
        for seed in seeds.clone() {
            let p = randomize_presentation(&case.body, seed);
            if randomize_presentation(&case.body, seed) != p {
                tally.disagreements.push(format!("seed {seed}: not reproducible"));
            }
            let mut shown = presented_items(&p.body);
            let mut original = original_items(&case.body);
            shown.sort();
            original.sort();
            if shown != original {
                tally.disagreements.push(format!("seed {seed}: not a permutation"));
                continue;
            }
            for sub in &case.submissions {
                tally.cases += 1;
                let got = p.grade(&case.body, sub).map(|v| v.accepted);
                let want = reference_accepts(&case.body, &translate(&case.body, &p.body, sub));
                if got != Ok(want) {
                    tally
                        .disagreements
                        .push(format!("seed {seed}, {sub:?}: got {got:?}, want {want}"));
                }
            }
        }
    }
    tally
}
