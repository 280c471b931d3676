//! Expected shape of a shipped corpus.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::card::DeploymentCard;
use crate::tier::TransparencyTier;
use crate::validate::infer_tier;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusManifest {
    pub expected_total: usize,
    /// Keyed by tier level as a string (`"1"`, `"2"`, `"3"`) in JSON.
    pub expected_tier_counts: BTreeMap<TransparencyTier, usize>,
    pub required_ids: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("cannot read manifest: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid manifest: {0}")]
    Json(#[from] serde_json::Error),
}

impl CorpusManifest {
    pub fn from_json(text: &str) -> Result<Self, ManifestError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ManifestError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Discrepancy {
    /// The manifest's own total disagrees with its tier counts.
    InconsistentManifest { expected_total: usize, tier_sum: usize },
    Total { expected: usize, actual: usize },
    TierCount { tier: TransparencyTier, expected: usize, actual: usize },
    MissingId(String),
}

impl fmt::Display for Discrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Discrepancy::InconsistentManifest { expected_total, tier_sum } => {
                write!(f, "manifest total {expected_total} differs from its tier counts ({tier_sum})")
            }
            Discrepancy::Total { expected, actual } => write!(f, "expected {expected} cards, found {actual}"),
            Discrepancy::TierCount { tier, expected, actual } => {
                write!(f, "expected {expected} cards at tier {tier}, found {actual}")
            }
            Discrepancy::MissingId(id) => write!(f, "required card `{id}` is missing"),
        }
    }
}

/// Empty when the corpus matches the manifest. Tiers are inferred, not
/// declared.
pub fn corpus_manifest_check(cards: &[DeploymentCard], manifest: &CorpusManifest) -> Vec<Discrepancy> {
    let mut out = Vec::new();

    let tier_sum: usize = manifest.expected_tier_counts.values().sum();
    if tier_sum != manifest.expected_total {
        out.push(Discrepancy::InconsistentManifest {
            expected_total: manifest.expected_total,
            tier_sum,
        });
    }
    if cards.len() != manifest.expected_total {
        out.push(Discrepancy::Total {
            expected: manifest.expected_total,
            actual: cards.len(),
        });
    }

    let mut actual: BTreeMap<TransparencyTier, usize> = BTreeMap::new();
    for tier in cards.iter().filter_map(infer_tier) {
        *actual.entry(tier).or_default() += 1;
    }
    for tier in TransparencyTier::ALL {
        let expected = manifest.expected_tier_counts.get(&tier).copied().unwrap_or(0);
        let found = actual.get(&tier).copied().unwrap_or(0);
        if expected != found {
            out.push(Discrepancy::TierCount {
                tier,
                expected,
                actual: found,
            });
        }
    }

    for id in &manifest.required_ids {
        if !cards.iter().any(|c| &c.id == id) {
            out.push(Discrepancy::MissingId(id.clone()));
        }
    }
    out
}
