use serde::{Deserialize, Serialize};

use super::pattern::{Pattern, PatternError};
use crate::model::{CodeRule, RuleKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleResult {
    pub rule_id: String,
    pub passed: bool,
    pub matches: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("rule `{rule_id}`: {source}")]
pub struct RuleError {
    pub rule_id: String,
    #[source]
    pub source: PatternError,
}

/// Evaluates every rule over `code`, in rule order.
pub fn evaluate_rules(rule_set: &[CodeRule], code: &str) -> Result<Vec<RuleResult>, RuleError> {
    rule_set
        .iter()
        .map(|rule| {
            let pattern = Pattern::compile(&rule.pattern).map_err(|source| RuleError {
                rule_id: rule.rule_id.clone(),
                source,
            })?;
            let matches = pattern.count(code);
            let passed = match rule.kind {
                RuleKind::ForbiddenPattern => matches == 0,
                RuleKind::RequiredPattern => matches >= 1,
                // A missing limit is rejected at pack load; treat it as zero here.
                RuleKind::MaxOccurrences => matches <= rule.limit.unwrap_or(0) as usize,
            };
            Ok(RuleResult {
                rule_id: rule.rule_id.clone(),
                passed,
                matches,
            })
        })
        .collect()
}
