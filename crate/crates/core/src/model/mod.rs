//! Authored challenge content: packs, challenges, the six challenge body
//! variants, hints, scoring and branch policies.
//!
//! Everything here is plain data. Loading and validation live in [`parse`],
//! authoring checks in [`lint`], shuffled presentation in [`present`] and the
//! per-pack summary in [`report`].

pub mod descriptor;
pub mod lint;
pub mod parse;
pub mod present;
pub mod report;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use descriptor::{descriptor, ChallengeTypeDescriptor, Hundredths, DESCRIPTORS};
pub use lint::{lint_pack, LintFinding, Severity};
pub use parse::{parse_pack, to_json, PackError};
pub use present::{randomize_presentation, IndexRemap, PresentedBody, Presentation};
pub use report::{pack_report, PackReport};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChallengePack {
    pub pack_id: String,
    pub title: String,
    pub version: String,
    pub challenges: Vec<Challenge>,
    pub scg_catalog: Vec<GuidelineRef>,
}

impl ChallengePack {
    pub fn challenge(&self, id: &str) -> Option<&Challenge> {
        self.challenges.iter().find(|c| c.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Challenge {
    pub id: String,
    pub title: String,
    pub base_points: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intro: Option<IntroStage>,
    pub body: ChallengeBody,
    #[serde(default)]
    pub hints: Vec<HintSpec>,
    pub wrong_branch: WrongBranchPolicy,
    pub correct_branch: CorrectBranchPolicy,
    pub conclusion: ConclusionStage,
    #[serde(default)]
    pub score_policy: ScorePolicy,
    pub guideline: GuidelineRef,
}

impl Challenge {
    pub fn hint(&self, hint_id: &str) -> Option<&HintSpec> {
        self.hints.iter().find(|h| h.hint_id == hint_id)
    }
}

/// Phase one: frames the secure-coding topic, optionally with a short quiz.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntroStage {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quiz: Option<ChallengeBody>,
    /// When set, a rejected quiz answer keeps the player in the quiz.
    #[serde(default)]
    pub gating: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ChallengeType {
    Scq,
    Mcq,
    Teq,
    Csc,
    Cec,
    Alr,
}

impl ChallengeType {
    pub const ALL: [ChallengeType; 6] = [
        ChallengeType::Scq,
        ChallengeType::Mcq,
        ChallengeType::Teq,
        ChallengeType::Csc,
        ChallengeType::Cec,
        ChallengeType::Alr,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ChallengeType::Scq => "SCQ",
            ChallengeType::Mcq => "MCQ",
            ChallengeType::Teq => "TEQ",
            ChallengeType::Csc => "CSC",
            ChallengeType::Cec => "CEC",
            ChallengeType::Alr => "ALR",
        }
    }
}

impl fmt::Display for ChallengeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// The type-specific payload of a challenge, including its answer key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ChallengeBody {
    Scq {
        guiding_question: String,
        options: Vec<String>,
        correct_index: usize,
    },
    Mcq {
        guiding_question: String,
        options: Vec<String>,
        correct_indices: BTreeSet<usize>,
    },
    Teq {
        guiding_question: String,
        accepted_answers: Vec<String>,
        #[serde(default)]
        normalization: NormalizationSpec,
    },
    Csc {
        guiding_question: String,
        code: String,
        selectable_units: Vec<CodeUnit>,
        correct_units: BTreeSet<CodeUnit>,
        prompt_mode: PromptMode,
        /// The guideline the snippet violates, for find-violated-guideline mode.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        guideline: Option<GuidelineRef>,
    },
    Cec {
        guiding_question: String,
        starter_code: String,
        rule_set: Vec<CodeRule>,
        fixtures: CecFixtures,
    },
    Alr {
        guiding_question: String,
        left: Vec<String>,
        right: Vec<String>,
        #[serde(with = "index_map")]
        answer_map: BTreeMap<usize, usize>,
        #[serde(default)]
        cardinality: Cardinality,
    },
}

impl ChallengeBody {
    pub fn challenge_type(&self) -> ChallengeType {
        match self {
            ChallengeBody::Scq { .. } => ChallengeType::Scq,
            ChallengeBody::Mcq { .. } => ChallengeType::Mcq,
            ChallengeBody::Teq { .. } => ChallengeType::Teq,
            ChallengeBody::Csc { .. } => ChallengeType::Csc,
            ChallengeBody::Cec { .. } => ChallengeType::Cec,
            ChallengeBody::Alr { .. } => ChallengeType::Alr,
        }
    }

    pub fn guiding_question(&self) -> &str {
        match self {
            ChallengeBody::Scq { guiding_question, .. }
            | ChallengeBody::Mcq { guiding_question, .. }
            | ChallengeBody::Teq { guiding_question, .. }
            | ChallengeBody::Csc { guiding_question, .. }
            | ChallengeBody::Cec { guiding_question, .. }
            | ChallengeBody::Alr { guiding_question, .. } => guiding_question,
        }
    }

    /// True for the variants allowed as intro or conclusion questions.
    pub fn is_choice_question(&self) -> bool {
        matches!(self, ChallengeBody::Scq { .. } | ChallengeBody::Mcq { .. })
    }
}

/// A selectable element of a code snippet. Lines are 1-based; expression
/// spans are byte ranges `[start, end)` within one line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeUnit {
    Line(u32),
    Expr { line: u32, start: u32, end: u32 },
}

impl CodeUnit {
    pub fn line(&self) -> u32 {
        match *self {
            CodeUnit::Line(line) | CodeUnit::Expr { line, .. } => line,
        }
    }
}

impl fmt::Display for CodeUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeUnit::Line(l) => write!(f, "line {l}"),
            CodeUnit::Expr { line, start, end } => write!(f, "line {line} [{start}..{end})"),
        }
    }
}

/// Left-index to right-index maps as JSON objects (`{"0": 2, "1": 0}`).
/// Tagged enums buffer their content, which loses serde_json's
/// string-to-integer key coercion, so keys are parsed here.
pub mod index_map {
    use std::collections::BTreeMap;

    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(map: &BTreeMap<usize, usize>, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_map(map.iter().map(|(k, v)| (k.to_string(), v)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<BTreeMap<usize, usize>, D::Error> {
        BTreeMap::<String, usize>::deserialize(deserializer)?
            .into_iter()
            .map(|(k, v)| {
                k.parse::<usize>()
                    .map(|k| (k, v))
                    .map_err(|_| D::Error::custom(format!("map key `{k}` is not an index")))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PromptMode {
    FindVulnerability,
    FindViolatedGuideline,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cardinality {
    #[default]
    Bijective,
    ManyToOne,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CecFixtures {
    pub known_good: Vec<String>,
    pub known_bad: Vec<String>,
}

/// Text matching rules applied to TEQ answers before comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct NormalizationSpec {
    pub trim: bool,
    pub case_fold: bool,
    pub collapse_internal_whitespace: bool,
}

impl Default for NormalizationSpec {
    fn default() -> Self {
        NormalizationSpec {
            trim: true,
            case_fold: true,
            collapse_internal_whitespace: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    ForbiddenPattern,
    RequiredPattern,
    MaxOccurrences,
}

/// One static check in a code-entry rule set. `feedback` is the coach
/// message shown when the rule fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeRule {
    pub rule_id: String,
    pub kind: RuleKind,
    pub pattern: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<u32>,
    pub feedback: String,
    pub guideline: GuidelineRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HintKind {
    ConceptDisclosure,
    ExternalReference,
    AnswerDetail,
}

impl HintKind {
    pub fn as_str(self) -> &'static str {
        match self {
            HintKind::ConceptDisclosure => "concept-disclosure",
            HintKind::ExternalReference => "external-reference",
            HintKind::AnswerDetail => "answer-detail",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HintSpec {
    pub hint_id: String,
    pub kind: HintKind,
    #[serde(default)]
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(default)]
    pub unlock: UnlockRule,
    #[serde(default)]
    pub cost: u32,
}

/// A hint unlocks once any configured threshold is reached. With neither
/// threshold configured the hint is available immediately.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnlockRule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub after_seconds: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub after_failed_attempts: Option<u32>,
}

impl UnlockRule {
    pub fn is_unlocked(&self, clock: u64, failed_attempts: u32) -> bool {
        match (self.after_seconds, self.after_failed_attempts) {
            (None, None) => true,
            (secs, tries) => {
                secs.is_some_and(|s| clock >= s) || tries.is_some_and(|t| failed_attempts >= t)
            }
        }
    }

    /// Human readable unlock condition relative to the current progress.
    pub fn describe(&self, clock: u64, failed_attempts: u32) -> String {
        let mut parts = Vec::new();
        if let Some(s) = self.after_seconds {
            parts.push(format!("in {}s", s.saturating_sub(clock)));
        }
        if let Some(t) = self.after_failed_attempts {
            let left = t.saturating_sub(failed_attempts);
            let plural = if left == 1 { "" } else { "s" };
            parts.push(format!("after {left} more failed attempt{plural}"));
        }
        if parts.is_empty() {
            "now".to_string()
        } else {
            format!("unlocks {}", parts.join(" or "))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScorePolicy {
    pub penalize_hints: bool,
    pub penalize_retries: bool,
    pub retry_penalty: u32,
    pub min_score: u32,
}

impl Default for ScorePolicy {
    fn default() -> Self {
        ScorePolicy {
            penalize_hints: true,
            penalize_retries: false,
            retry_penalty: 0,
            min_score: 0,
        }
    }
}

/// What happens after a rejected answer in the challenge stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum WrongBranchPolicy {
    ReturnToChallenge {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_attempts: Option<u32>,
    },
    ExplainThenReturn {
        explanation: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_attempts: Option<u32>,
    },
    ProceedToFinish,
    ExplainThenFinish {
        explanation: String,
    },
}

impl WrongBranchPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            WrongBranchPolicy::ReturnToChallenge { .. } => "return-to-challenge",
            WrongBranchPolicy::ExplainThenReturn { .. } => "explain-then-return",
            WrongBranchPolicy::ProceedToFinish => "proceed-to-finish",
            WrongBranchPolicy::ExplainThenFinish { .. } => "explain-then-finish",
        }
    }

    pub fn returns_to_challenge(&self) -> bool {
        matches!(
            self,
            WrongBranchPolicy::ReturnToChallenge { .. } | WrongBranchPolicy::ExplainThenReturn { .. }
        )
    }

    pub fn explanation(&self) -> Option<&str> {
        match self {
            WrongBranchPolicy::ExplainThenReturn { explanation, .. }
            | WrongBranchPolicy::ExplainThenFinish { explanation } => Some(explanation),
            _ => None,
        }
    }

    pub fn max_attempts(&self) -> Option<u32> {
        match self {
            WrongBranchPolicy::ReturnToChallenge { max_attempts }
            | WrongBranchPolicy::ExplainThenReturn { max_attempts, .. } => *max_attempts,
            _ => None,
        }
    }
}

/// What happens after an accepted answer in the challenge stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum CorrectBranchPolicy {
    ConcludeThenFinish {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        additional_question: Option<ChallengeBody>,
    },
    Finish,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConclusionStage {
    pub explanation: String,
    #[serde(default)]
    pub references: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GuidelineSource {
    #[serde(rename = "CERT")]
    Cert,
    #[serde(rename = "OWASP")]
    Owasp,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GuidelineRef {
    pub source: GuidelineSource,
    pub identifier: String,
    pub title: String,
}

impl GuidelineRef {
    pub fn new(source: GuidelineSource, identifier: &str, title: &str) -> Self {
        GuidelineRef {
            source,
            identifier: identifier.to_string(),
            title: title.to_string(),
        }
    }

    /// Catalog lookups match on source and identifier; titles are display text.
    pub fn same_guideline(&self, other: &GuidelineRef) -> bool {
        self.source == other.source && self.identifier == other.identifier
    }
}
