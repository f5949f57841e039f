//! Pack file loading and validation.
//!
//! A pack is a UTF-8 JSON document. Loading happens in two passes: serde
//! builds the typed value (structural errors carry the JSON path), then
//! [`validate_pack`] checks every invariant serde cannot express and runs
//! each code-entry rule set over its own fixtures.

use std::collections::HashSet;

use thiserror::Error;

use super::{
    Cardinality, ChallengeBody, ChallengePack, CodeUnit, CorrectBranchPolicy, HintKind, RuleKind,
    WrongBranchPolicy,
};
use crate::grader::{evaluate_rules, normalize, Pattern};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PackError {
    #[error("{path}: {reason}")]
    Parse { path: String, reason: String },
    #[error("{challenge_id}: fixture {fixture}: {reason}")]
    Fixture {
        challenge_id: String,
        fixture: String,
        reason: String,
    },
}

impl PackError {
    fn parse(path: impl Into<String>, reason: impl Into<String>) -> Self {
        PackError::Parse {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

pub fn parse_pack(document: &str) -> Result<ChallengePack, PackError> {
    let de = &mut serde_json::Deserializer::from_str(document);
    let pack: ChallengePack = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let reason = e.inner().to_string();
        PackError::parse(if path == "." { "$".to_string() } else { path }, reason)
    })?;
    validate_pack(&pack)?;
    Ok(pack)
}

/// Serializes a pack back to the pack file format.
pub fn to_json(pack: &ChallengePack) -> String {
    serde_json::to_string_pretty(pack).expect("pack values always serialize")
}

type Check = Result<(), PackError>;

fn ensure(cond: bool, path: impl FnOnce() -> String, reason: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(PackError::parse(path(), reason()))
    }
}

pub fn validate_pack(pack: &ChallengePack) -> Check {
    ensure(!pack.pack_id.trim().is_empty(), || "pack_id".into(), || "must be non-empty".into())?;
    ensure(
        !pack.challenges.is_empty(),
        || "challenges".into(),
        || "a pack needs at least one challenge".into(),
    )?;

    let mut ids = HashSet::new();
    for (ci, ch) in pack.challenges.iter().enumerate() {
        let at = |field: &str| format!("challenges[{ci}].{field}");
        ensure(!ch.id.trim().is_empty(), || at("id"), || "must be non-empty".into())?;
        ensure(ids.insert(ch.id.as_str()), || at("id"), || format!("duplicate challenge id `{}`", ch.id))?;
        ensure(ch.base_points > 0, || at("base_points"), || "must be greater than 0".into())?;
        ensure(
            ch.score_policy.min_score <= ch.base_points,
            || at("score_policy.min_score"),
            || format!("{} exceeds base_points {}", ch.score_policy.min_score, ch.base_points),
        )?;

        let cited = |path: String, g: &super::GuidelineRef| {
            ensure(
                pack.scg_catalog.iter().any(|c| c.same_guideline(g)),
                || path,
                || format!("guideline {} is not in scg_catalog", g.identifier),
            )
        };
        cited(at("guideline"), &ch.guideline)?;

        if let Some(intro) = &ch.intro {
            if let Some(quiz) = &intro.quiz {
                ensure(
                    quiz.is_choice_question(),
                    || at("intro.quiz"),
                    || "intro quiz must be an SCQ or MCQ".into(),
                )?;
                validate_body(quiz, &at("intro.quiz"), &ch.id)?;
            }
        }

        validate_body(&ch.body, &at("body"), &ch.id)?;
        match &ch.body {
            ChallengeBody::Csc {
                guideline: Some(g), ..
            } => cited(at("body.guideline"), g)?,
            ChallengeBody::Cec { rule_set, .. } => {
                for (ri, rule) in rule_set.iter().enumerate() {
                    cited(at(&format!("body.rule_set[{ri}].guideline")), &rule.guideline)?;
                }
            }
            _ => {}
        }

        let mut hint_ids = HashSet::new();
        for (hi, hint) in ch.hints.iter().enumerate() {
            let hat = |f: &str| at(&format!("hints[{hi}].{f}"));
            ensure(!hint.hint_id.is_empty(), || hat("hint_id"), || "must be non-empty".into())?;
            ensure(
                hint_ids.insert(hint.hint_id.as_str()),
                || hat("hint_id"),
                || format!("duplicate hint id `{}`", hint.hint_id),
            )?;
            ensure(
                hint.cost < ch.base_points,
                || hat("cost"),
                || format!("cost {} must be below base_points {}", hint.cost, ch.base_points),
            )?;
            let has_url = hint.url.as_deref().is_some_and(|u| !u.trim().is_empty());
            ensure(
                !hint.text.trim().is_empty() || (hint.kind == HintKind::ExternalReference && has_url),
                || hat("text"),
                || "hint text may only be empty for an external-reference hint with a url".into(),
            )?;
        }

        match &ch.wrong_branch {
            WrongBranchPolicy::ExplainThenReturn { explanation, .. }
            | WrongBranchPolicy::ExplainThenFinish { explanation } => ensure(
                !explanation.trim().is_empty(),
                || at("wrong_branch.explanation"),
                || format!("required for {}", ch.wrong_branch.name()),
            )?,
            _ => {}
        }
        if let Some(max) = ch.wrong_branch.max_attempts() {
            ensure(max >= 1, || at("wrong_branch.max_attempts"), || "must be at least 1".into())?;
        }

        if let CorrectBranchPolicy::ConcludeThenFinish {
            additional_question: Some(q),
        } = &ch.correct_branch
        {
            let path = at("correct_branch.additional_question");
            ensure(q.is_choice_question(), || path.clone(), || "must be an SCQ or MCQ".into())?;
            validate_body(q, &path, &ch.id)?;
        }
    }
    Ok(())
}

fn distinct(items: &[String]) -> Option<&str> {
    let mut seen = HashSet::new();
    items.iter().find(|s| !seen.insert(s.as_str())).map(String::as_str)
}

fn validate_body(body: &ChallengeBody, at: &str, challenge_id: &str) -> Check {
    let field = |f: &str| format!("{at}.{f}");
    ensure(
        !body.guiding_question().trim().is_empty(),
        || field("guiding_question"),
        || "must be non-empty".into(),
    )?;
    match body {
        ChallengeBody::Scq {
            options, correct_index, ..
        } => {
            ensure(options.len() >= 2, || field("options"), || "needs at least 2 options".into())?;
            if let Some(d) = distinct(options) {
                return Err(PackError::parse(field("options"), format!("duplicate option `{d}`")));
            }
            ensure(
                *correct_index < options.len(),
                || field("correct_index"),
                || format!("{correct_index} out of range for {} options", options.len()),
            )
        }
        ChallengeBody::Mcq {
            options,
            correct_indices,
            ..
        } => {
            ensure(options.len() >= 2, || field("options"), || "needs at least 2 options".into())?;
            if let Some(d) = distinct(options) {
                return Err(PackError::parse(field("options"), format!("duplicate option `{d}`")));
            }
            ensure(
                correct_indices.len() >= 2,
                || field("correct_indices"),
                || "a multiple-choice question must have more than one correct answer".into(),
            )?;
            match correct_indices.iter().find(|&&i| i >= options.len()) {
                Some(i) => Err(PackError::parse(
                    field("correct_indices"),
                    format!("{i} out of range for {} options", options.len()),
                )),
                None => Ok(()),
            }
        }
        ChallengeBody::Teq {
            accepted_answers,
            normalization,
            ..
        } => {
            ensure(
                !accepted_answers.is_empty(),
                || field("accepted_answers"),
                || "needs at least one accepted answer".into(),
            )?;
            match accepted_answers
                .iter()
                .position(|a| normalize(a, normalization).is_empty())
            {
                Some(i) => Err(PackError::parse(
                    format!("{at}.accepted_answers[{i}]"),
                    "empty after normalization",
                )),
                None => Ok(()),
            }
        }
        ChallengeBody::Csc {
            code,
            selectable_units,
            correct_units,
            ..
        } => {
            ensure(
                !selectable_units.is_empty(),
                || field("selectable_units"),
                || "needs at least one unit".into(),
            )?;
            let lines: Vec<&str> = code.lines().collect();
            let mut seen = HashSet::new();
            for (ui, unit) in selectable_units.iter().enumerate() {
                let upath = || format!("{at}.selectable_units[{ui}]");
                ensure(seen.insert(*unit), upath, || format!("duplicate unit {unit}"))?;
                let line = unit.line() as usize;
                ensure(
                    line >= 1 && line <= lines.len(),
                    upath,
                    || format!("line {line} outside code (1..={})", lines.len()),
                )?;
                if let CodeUnit::Expr { start, end, .. } = *unit {
                    let text = lines[line - 1];
                    let (s, e) = (start as usize, end as usize);
                    ensure(
                        s < e && e <= text.len() && text.is_char_boundary(s) && text.is_char_boundary(e),
                        upath,
                        || format!("span [{s}..{e}) invalid for line {line}"),
                    )?;
                }
            }
            ensure(
                !correct_units.is_empty(),
                || field("correct_units"),
                || "needs at least one correct unit".into(),
            )?;
            match correct_units.iter().find(|u| !selectable_units.contains(u)) {
                Some(u) => Err(PackError::parse(field("correct_units"), format!("{u} is not selectable"))),
                None => Ok(()),
            }
        }
        ChallengeBody::Cec {
            starter_code,
            rule_set,
            fixtures,
            ..
        } => {
            ensure(!rule_set.is_empty(), || field("rule_set"), || "needs at least one rule".into())?;
            let mut rule_ids = HashSet::new();
            for (ri, rule) in rule_set.iter().enumerate() {
                let rpath = |f: &str| format!("{at}.rule_set[{ri}].{f}");
                ensure(
                    rule_ids.insert(rule.rule_id.as_str()),
                    || rpath("rule_id"),
                    || format!("duplicate rule id `{}`", rule.rule_id),
                )?;
                Pattern::compile(&rule.pattern).map_err(|e| PackError::parse(rpath("pattern"), e.to_string()))?;
                let is_max = rule.kind == RuleKind::MaxOccurrences;
                ensure(
                    rule.limit.is_some() == is_max,
                    || rpath("limit"),
                    || {
                        if is_max {
                            "max-occurrences rules need a limit".into()
                        } else {
                            "limit is only allowed on max-occurrences rules".into()
                        }
                    },
                )?;
                ensure(!rule.feedback.trim().is_empty(), || rpath("feedback"), || "must be non-empty".into())?;
            }
            ensure(
                !fixtures.known_good.is_empty(),
                || field("fixtures.known_good"),
                || "needs at least one known-good fixture".into(),
            )?;
            ensure(
                !fixtures.known_bad.is_empty(),
                || field("fixtures.known_bad"),
                || "needs at least one known-bad fixture".into(),
            )?;

            let passes = |code: &str| -> Result<Vec<String>, PackError> {
                let results =
                    evaluate_rules(rule_set, code).map_err(|e| PackError::parse(field("rule_set"), e.to_string()))?;
                Ok(results.into_iter().filter(|r| !r.passed).map(|r| r.rule_id).collect())
            };
            let fixture_err = |fixture: String, reason: String| PackError::Fixture {
                challenge_id: challenge_id.to_string(),
                fixture,
                reason,
            };
            for (i, good) in fixtures.known_good.iter().enumerate() {
                let failing = passes(good)?;
                if !failing.is_empty() {
                    return Err(fixture_err(
                        format!("known_good[{i}]"),
                        format!("expected to pass but fails {}", failing.join(", ")),
                    ));
                }
            }
            for (i, bad) in fixtures.known_bad.iter().enumerate() {
                if passes(bad)?.is_empty() {
                    return Err(fixture_err(
                        format!("known_bad[{i}]"),
                        "expected to fail but passes every rule".into(),
                    ));
                }
            }
            if passes(starter_code)?.is_empty() {
                return Err(fixture_err(
                    "starter_code".into(),
                    "starter code already passes every rule".into(),
                ));
            }
            Ok(())
        }
        ChallengeBody::Alr {
            left,
            right,
            answer_map,
            cardinality,
            ..
        } => {
            ensure(!left.is_empty(), || field("left"), || "must be non-empty".into())?;
            ensure(!right.is_empty(), || field("right"), || "must be non-empty".into())?;
            if let Some(d) = distinct(right) {
                return Err(PackError::parse(field("right"), format!("duplicate item `{d}`")));
            }
            ensure(
                answer_map.len() == left.len() && answer_map.keys().all(|&k| k < left.len()),
                || field("answer_map"),
                || format!("must map every left index 0..{} exactly once", left.len()),
            )?;
            if let Some((l, r)) = answer_map.iter().find(|(_, &r)| r >= right.len()) {
                return Err(PackError::parse(
                    field("answer_map"),
                    format!("{l} -> {r}: right index out of range for {} items", right.len()),
                ));
            }
            if *cardinality == Cardinality::Bijective {
                ensure(
                    left.len() == right.len(),
                    || field("right"),
                    || "a bijective association needs equally long lists".into(),
                )?;
                let mut used = HashSet::new();
                ensure(
                    answer_map.values().all(|r| used.insert(*r)),
                    || field("answer_map"),
                    || "a bijective association cannot reuse right items".into(),
                )?;
            }
            Ok(())
        }
    }
}
