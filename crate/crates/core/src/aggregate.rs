//! Counts of deployments per level of a categorical variable.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::card::{DeploymentCard, Sector};
use crate::index::{RegistryIndex, UNSPECIFIED};
use crate::validate::infer_tier;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregateVariable {
    Tier,
    Flavor,
    DeploymentModel,
    Region,
    Sector,
    ReleaseType,
    DataSource,
    AccessType,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown variable `{0}`")]
pub struct UnknownVariable(pub String);

impl AggregateVariable {
    pub const ALL: [AggregateVariable; 8] = [
        AggregateVariable::Tier,
        AggregateVariable::Flavor,
        AggregateVariable::DeploymentModel,
        AggregateVariable::Region,
        AggregateVariable::Sector,
        AggregateVariable::ReleaseType,
        AggregateVariable::DataSource,
        AggregateVariable::AccessType,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AggregateVariable::Tier => "tier",
            AggregateVariable::Flavor => "flavor",
            AggregateVariable::DeploymentModel => "deployment_model",
            AggregateVariable::Region => "region",
            AggregateVariable::Sector => "sector",
            AggregateVariable::ReleaseType => "release_type",
            AggregateVariable::DataSource => "data_source",
            AggregateVariable::AccessType => "access_type",
        }
    }

    /// Bucket key of a card; `unspecified` when the card does not say.
    pub fn key_of(self, card: &DeploymentCard) -> String {
        let model = card.deployment_model.as_ref();
        let key = match self {
            AggregateVariable::Tier => infer_tier(card).map(|t| t.to_string()),
            AggregateVariable::Flavor => card.flavor.as_ref().and_then(|f| f.name).map(|n| n.as_str().to_owned()),
            AggregateVariable::DeploymentModel => model.and_then(|m| m.model).map(|m| m.as_str().to_owned()),
            AggregateVariable::Region => card.data_product.region.clone(),
            AggregateVariable::Sector => card.data_product.sector.as_ref().map(|s: &Sector| s.key().to_owned()),
            AggregateVariable::ReleaseType => model.and_then(|m| m.release_type).map(|v| v.as_str().to_owned()),
            AggregateVariable::DataSource => model.and_then(|m| m.data_source).map(|v| v.as_str().to_owned()),
            AggregateVariable::AccessType => model.and_then(|m| m.access_type).map(|v| v.as_str().to_owned()),
        };
        key.unwrap_or_else(|| UNSPECIFIED.to_owned())
    }
}

impl FromStr for AggregateVariable {
    type Err = UnknownVariable;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| UnknownVariable(s.to_owned()))
    }
}

impl fmt::Display for AggregateVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Inclusive year bounds; a missing bound is open.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct YearRange {
    pub min: Option<i32>,
    pub max: Option<i32>,
}

impl YearRange {
    pub fn new(min: i32, max: i32) -> Self {
        YearRange {
            min: Some(min),
            max: Some(max),
        }
    }

    pub fn contains(&self, year: i32) -> bool {
        self.min.is_none_or(|m| year >= m) && self.max.is_none_or(|m| year <= m)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bucket {
    pub key: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearBuckets {
    pub year: i32,
    pub buckets: Vec<Bucket>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregateResult {
    pub variable: AggregateVariable,
    pub buckets: Vec<Bucket>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_year: Option<Vec<YearBuckets>>,
}

impl AggregateResult {
    pub fn total(&self) -> usize {
        self.buckets.iter().map(|b| b.count).sum()
    }

    pub fn count(&self, key: &str) -> usize {
        self.buckets.iter().find(|b| b.key == key).map_or(0, |b| b.count)
    }

    /// Bucket with the highest count (lowest key on ties).
    pub fn mode(&self) -> Option<&Bucket> {
        self.buckets.first()
    }
}

/// Count descending, then key ascending.
fn into_buckets(counts: BTreeMap<String, usize>) -> Vec<Bucket> {
    let mut buckets: Vec<Bucket> = counts.into_iter().map(|(key, count)| Bucket { key, count }).collect();
    buckets.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.key.cmp(&b.key)));
    buckets
}

pub(crate) fn aggregate(index: &RegistryIndex, variable: AggregateVariable, years: Option<YearRange>) -> AggregateResult {
    let mut counts = BTreeMap::new();
    for card in index.cards() {
        let in_scope = match years {
            None => true,
            Some(range) => card.data_product.publication_year.is_some_and(|y| range.contains(y)),
        };
        if in_scope {
            *counts.entry(variable.key_of(card)).or_default() += 1;
        }
    }
    AggregateResult {
        variable,
        buckets: into_buckets(counts),
        per_year: None,
    }
}

/// Cards without a publication year are counted in `buckets` but belong to
/// no year entry.
pub(crate) fn aggregate_by_year(index: &RegistryIndex, variable: AggregateVariable) -> AggregateResult {
    let mut by_year: BTreeMap<i32, BTreeMap<String, usize>> = BTreeMap::new();
    for card in index.cards() {
        if let Some(year) = card.data_product.publication_year {
            *by_year.entry(year).or_default().entry(variable.key_of(card)).or_default() += 1;
        }
    }
    let per_year = by_year
        .into_iter()
        .map(|(year, counts)| YearBuckets {
            year,
            buckets: into_buckets(counts),
        })
        .collect();
    AggregateResult {
        per_year: Some(per_year),
        ..aggregate(index, variable, None)
    }
}
