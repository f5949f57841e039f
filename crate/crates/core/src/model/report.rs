use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;

use super::{descriptor, ChallengePack, ChallengeType};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackReport {
    pub pack_id: String,
    pub challenge_count: usize,
    /// Every type appears, including those with zero challenges.
    pub per_type: BTreeMap<ChallengeType, usize>,
    /// Lowest achievable total: every challenge at its score floor.
    pub min_total: u64,
    /// Highest achievable total: every challenge at base points.
    pub max_total: u64,
    /// Mean expert agreement over challenges whose type has survey data,
    /// kept exact. `None` when no challenge has survey data.
    pub expert_agreement_mean: Option<Ratio<u64>>,
    pub challenges_with_survey_data: usize,
}

impl PackReport {
    pub fn expert_agreement_mean_f64(&self) -> Option<f64> {
        self.expert_agreement_mean
            .map(|r| *r.numer() as f64 / *r.denom() as f64)
    }
}

pub fn pack_report(pack: &ChallengePack) -> PackReport {
    let mut per_type: BTreeMap<ChallengeType, usize> = ChallengeType::ALL.iter().map(|t| (*t, 0)).collect();
    let mut sum_hundredths = 0u64;
    let mut surveyed = 0usize;
    for ch in &pack.challenges {
        let ty = ch.body.challenge_type();
        *per_type.entry(ty).or_default() += 1;
        if let Some(mean) = descriptor(ty).expert_agreement_mean {
            sum_hundredths += u64::from(mean.0);
            surveyed += 1;
        }
    }
    PackReport {
        pack_id: pack.pack_id.clone(),
        challenge_count: pack.challenges.len(),
        per_type,
        min_total: pack.challenges.iter().map(|c| u64::from(c.score_policy.min_score)).sum(),
        max_total: pack.challenges.iter().map(|c| u64::from(c.base_points)).sum(),
        expert_agreement_mean: (surveyed > 0).then(|| Ratio::new(sum_hundredths, 100 * surveyed as u64)),
        challenges_with_survey_data: surveyed,
    }
}

/// Renders a decimal rounded half-up to two places.
fn two_places(r: Ratio<u64>) -> String {
    let scaled = (r * 100u64 * 2u64 + Ratio::from_integer(1)) / 2u64;
    let h = scaled.to_integer();
    format!("{}.{:02}", h / 100, h % 100)
}

impl fmt::Display for PackReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pack          {}", self.pack_id)?;
        writeln!(f, "challenges    {}", self.challenge_count)?;
        writeln!(f)?;
        writeln!(f, "{:<6} {:>5} {:>10} {:>8} {:>5}", "type", "count", "agreement", "stddev", "rank")?;
        for (ty, count) in &self.per_type {
            let d = descriptor(*ty);
            let show = |v: Option<super::Hundredths>| v.map_or("-".to_string(), |h| h.to_string());
            writeln!(
                f,
                "{:<6} {:>5} {:>10} {:>8} {:>5}",
                ty.tag(),
                count,
                show(d.expert_agreement_mean),
                show(d.expert_agreement_stddev),
                d.rank.map_or("-".to_string(), |r| r.to_string()),
            )?;
        }
        writeln!(f)?;
        writeln!(f, "score range   {} to {}", self.min_total, self.max_total)?;
        match self.expert_agreement_mean {
            Some(mean) => writeln!(
                f,
                "agreement     {} (mean over {} surveyed challenges)",
                two_places(mean),
                self.challenges_with_survey_data
            ),
            None => writeln!(f, "agreement     - (no surveyed challenge types)"),
        }
    }
}
