//! Authoring checks that never block loading a pack.

use std::fmt;

use serde::Serialize;

use super::{ChallengeBody, ChallengePack, PromptMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Info => "INFO",
            Severity::Warning => "WARNING",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LintFinding {
    pub severity: Severity,
    pub challenge_id: String,
    pub rule: &'static str,
    pub message: String,
}

impl fmt::Display for LintFinding {
    /// `SEVERITY challenge_id: message`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", self.severity, self.challenge_id, self.message)
    }
}

pub const RULE_CONCLUSION: &str = "conclusion-explanation";
pub const RULE_HINT_COST: &str = "hint-cost";
pub const RULE_HINTS_FOR_HARD: &str = "hints-for-difficult";
pub const RULE_CSC_GUIDELINE: &str = "csc-guideline";

/// Findings sorted by (challenge id, rule). Hint-cost findings for the same
/// challenge keep hint order.
pub fn lint_pack(pack: &ChallengePack) -> Vec<LintFinding> {
    let mut findings = Vec::new();
    let mut points: Vec<u32> = pack.challenges.iter().map(|c| c.base_points).collect();
    points.sort_unstable();

    for ch in &pack.challenges {
        let mut push = |severity, rule, message: String| {
            findings.push(LintFinding {
                severity,
                challenge_id: ch.id.clone(),
                rule,
                message,
            })
        };

        if ch.conclusion.explanation.trim().is_empty() {
            push(Severity::Warning, RULE_CONCLUSION, "missing conclusion explanation".into());
        }

        for hint in &ch.hints {
            // cost > 25% of base_points, in integers
            if u64::from(hint.cost) * 4 > u64::from(ch.base_points) {
                push(
                    Severity::Warning,
                    RULE_HINT_COST,
                    format!(
                        "hint cost exceeds 25% of base points (hint {} costs {} of {})",
                        hint.hint_id, hint.cost, ch.base_points
                    ),
                );
            }
        }

        if ch.hints.is_empty() && above_median(ch.base_points, &points) {
            push(
                Severity::Info,
                RULE_HINTS_FOR_HARD,
                "no hints on a challenge worth more than the pack median".into(),
            );
        }

        if let ChallengeBody::Csc {
            prompt_mode: PromptMode::FindViolatedGuideline,
            guideline: None,
            ..
        } = &ch.body
        {
            push(
                Severity::Warning,
                RULE_CSC_GUIDELINE,
                "find-violated-guideline snippet does not name its guideline".into(),
            );
        }
    }

    findings.sort_by(|a, b| (a.challenge_id.as_str(), a.rule).cmp(&(b.challenge_id.as_str(), b.rule)));
    findings
}

/// `sorted` must be ascending. Even-length medians average the middle pair.
fn above_median(value: u32, sorted: &[u32]) -> bool {
    let n = sorted.len();
    if n == 0 {
        return false;
    }
    let twice_median = if n % 2 == 1 {
        2 * u64::from(sorted[n / 2])
    } else {
        u64::from(sorted[n / 2 - 1]) + u64::from(sorted[n / 2])
    };
    2 * u64::from(value) > twice_median
}
