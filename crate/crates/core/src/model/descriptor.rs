//! Expert agreement statistics per challenge type (five-point Likert scale).
//!
//! Static metadata for reporting only; never used in scoring. Values are
//! stored as exact hundredths.

use std::fmt;

use super::ChallengeType;

/// A non-negative decimal with two fractional digits, stored exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hundredths(pub u32);

impl Hundredths {
    pub fn as_f64(self) -> f64 {
        f64::from(self.0) / 100.0
    }
}

impl fmt::Display for Hundredths {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.0 / 100, self.0 % 100)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChallengeTypeDescriptor {
    pub type_tag: ChallengeType,
    pub expert_agreement_mean: Option<Hundredths>,
    pub expert_agreement_stddev: Option<Hundredths>,
    pub rank: Option<u8>,
}

/// Ordered by rank; ALR has no survey data and comes last.
pub const DESCRIPTORS: [ChallengeTypeDescriptor; 6] = [
    surveyed(ChallengeType::Cec, 430, 92, 1),
    surveyed(ChallengeType::Csc, 430, 126, 2),
    surveyed(ChallengeType::Scq, 395, 76, 3),
    surveyed(ChallengeType::Mcq, 380, 100, 4),
    surveyed(ChallengeType::Teq, 315, 104, 5),
    ChallengeTypeDescriptor {
        type_tag: ChallengeType::Alr,
        expert_agreement_mean: None,
        expert_agreement_stddev: None,
        rank: None,
    },
];

const fn surveyed(type_tag: ChallengeType, mean: u32, stddev: u32, rank: u8) -> ChallengeTypeDescriptor {
    ChallengeTypeDescriptor {
        type_tag,
        expert_agreement_mean: Some(Hundredths(mean)),
        expert_agreement_stddev: Some(Hundredths(stddev)),
        rank: Some(rank),
    }
}

pub fn descriptor(ty: ChallengeType) -> &'static ChallengeTypeDescriptor {
    DESCRIPTORS
        .iter()
        .find(|d| d.type_tag == ty)
        .expect("every challenge type has a descriptor")
}
