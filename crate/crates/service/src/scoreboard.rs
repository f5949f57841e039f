use std::collections::BTreeMap;

use ctf_core::Outcome;
use serde::{Deserialize, Serialize};

/// What the scoreboard needs from one Finished event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinishRecord {
    pub player_id: String,
    pub challenge_id: String,
    pub outcome: Outcome,
    pub score: u32,
    /// Absolute solve time: session start plus the logical clock.
    pub at: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreboardEntry {
    pub player_id: String,
    pub solved: u32,
    pub total_score: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_solve: Option<u64>,
}

/// Folds Finished events into the ranking. Only solves count, each
/// challenge once per player (best score). Ordered by total score
/// descending, then earlier last solve, then player id.
pub fn scoreboard<'a>(finished: impl IntoIterator<Item = &'a FinishRecord>) -> Vec<ScoreboardEntry> {
    let mut best: BTreeMap<(&str, &str), (u32, u64)> = BTreeMap::new();
    for r in finished {
        if r.outcome != Outcome::Solved {
            continue;
        }
        let slot = best.entry((&r.player_id, &r.challenge_id)).or_insert((r.score, r.at));
        if r.score > slot.0 || (r.score == slot.0 && r.at < slot.1) {
            *slot = (r.score, r.at);
        }
    }
    let mut players: BTreeMap<&str, ScoreboardEntry> = BTreeMap::new();
    for ((player, _), (score, at)) in best {
        let e = players.entry(player).or_insert_with(|| ScoreboardEntry {
            player_id: player.to_string(),
            solved: 0,
            total_score: 0,
            last_solve: None,
        });
        e.solved += 1;
        e.total_score += u64::from(score);
        e.last_solve = Some(e.last_solve.map_or(at, |t| t.max(at)));
    }
    let mut entries: Vec<ScoreboardEntry> = players.into_values().collect();
    entries.sort_by(|a, b| {
        b.total_score
            .cmp(&a.total_score)
            .then(a.last_solve.cmp(&b.last_solve))
            .then_with(|| a.player_id.cmp(&b.player_id))
    });
    entries
}
