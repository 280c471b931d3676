use std::fmt;

use serde::{Deserialize, Serialize};

/// Completeness level of a deployment card.
///
/// Tiers measure how much a curator disclosed, not how good the deployment
/// is. Higher tiers require strictly more fields, so passing tier `t`
/// implies passing every lower tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct TransparencyTier(u8);

impl TransparencyTier {
    pub const ONE: TransparencyTier = TransparencyTier(1);
    pub const TWO: TransparencyTier = TransparencyTier(2);
    pub const THREE: TransparencyTier = TransparencyTier(3);

    /// All tiers, ascending.
    pub const ALL: [TransparencyTier; 3] = [Self::ONE, Self::TWO, Self::THREE];

    pub fn new(level: u8) -> Option<Self> {
        (1..=3).contains(&level).then_some(TransparencyTier(level))
    }

    pub fn level(self) -> u8 {
        self.0
    }

    /// The tier directly below this one, if any.
    pub fn lower(self) -> Option<Self> {
        Self::new(self.0 - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("transparency tier must be 1, 2 or 3, got {0}")]
pub struct InvalidTier(pub i64);

impl TryFrom<u8> for TransparencyTier {
    type Error = InvalidTier;

    fn try_from(level: u8) -> Result<Self, Self::Error> {
        Self::new(level).ok_or(InvalidTier(level.into()))
    }
}

impl TryFrom<i64> for TransparencyTier {
    type Error = InvalidTier;

    fn try_from(level: i64) -> Result<Self, Self::Error> {
        u8::try_from(level)
            .ok()
            .and_then(Self::new)
            .ok_or(InvalidTier(level))
    }
}

impl From<TransparencyTier> for u8 {
    fn from(tier: TransparencyTier) -> u8 {
        tier.0
    }
}

impl fmt::Display for TransparencyTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
