//! Immutable corpus snapshot with the flattened table rows.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::aggregate::{self, AggregateResult, AggregateVariable, YearRange};
use crate::card::DeploymentCard;
use crate::query::{self, Query, QueryError};
use crate::tier::TransparencyTier;
use crate::validate::infer_tier;

/// Placeholder for a categorical value the card does not state.
pub const UNSPECIFIED: &str = "unspecified";

pub const ACCOUNTING_KEYWORDS: [&str; 2] = ["composition", "post-processing"];
pub const IMPLEMENTATION_KEYWORDS: [&str; 3] = ["pre-processing", "mechanisms", "justification"];

/// One row of the deployments table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowProjection {
    pub id: String,
    pub name: String,
    pub curator: String,
    pub description: String,
    pub publication_year: Option<i32>,
    pub tier: Option<TransparencyTier>,
    pub flavor_label: String,
    pub privacy_unit: Option<String>,
    pub parameters_summary: String,
    pub model_label: String,
    pub release_type: String,
    pub data_source: String,
    pub access_type: String,
    pub accounting_keywords: Vec<String>,
    pub implementation_keywords: Vec<String>,
    pub has_more_info: bool,
}

fn or_unspecified(value: Option<impl Into<String>>) -> String {
    value.map(Into::into).unwrap_or_else(|| UNSPECIFIED.to_owned())
}

/// Flattens a card into its table row. The tier shown is the inferred one.
pub fn project_row(card: &DeploymentCard) -> RowProjection {
    let dp = &card.data_product;
    let model = card.deployment_model.as_ref();

    let accounting_keywords = card
        .accounting
        .as_ref()
        .map(|a| {
            [a.composition.is_some(), a.post_processing.is_some()]
                .into_iter()
                .zip(ACCOUNTING_KEYWORDS)
                .filter_map(|(present, kw)| present.then(|| kw.to_owned()))
                .collect()
        })
        .unwrap_or_default();
    let implementation_keywords = card
        .implementation
        .as_ref()
        .map(|i| {
            [i.pre_processing.is_some(), i.mechanisms.is_some(), i.justification.is_some()]
                .into_iter()
                .zip(IMPLEMENTATION_KEYWORDS)
                .filter_map(|(present, kw)| present.then(|| kw.to_owned()))
                .collect()
        })
        .unwrap_or_default();

    let parameters_summary = card
        .privacy_loss
        .as_ref()
        .map(|p| p.parameters.iter().map(|q| q.summary()).collect::<Vec<_>>().join(", "))
        .unwrap_or_default();

    let has_more_info = card
        .more_info
        .as_ref()
        .is_some_and(|m| !m.sources.is_empty() || m.data_product_link.is_some() || m.notes.is_some());

    RowProjection {
        id: card.id.clone(),
        name: dp.name.clone().unwrap_or_default(),
        curator: dp.curator.clone().unwrap_or_default(),
        description: dp.description.clone().unwrap_or_default(),
        publication_year: dp.publication_year,
        tier: infer_tier(card),
        flavor_label: or_unspecified(card.flavor.as_ref().and_then(|f| f.label())),
        privacy_unit: card.privacy_loss.as_ref().and_then(|p| p.privacy_unit.clone()),
        parameters_summary,
        model_label: or_unspecified(model.and_then(|m| m.label())),
        release_type: or_unspecified(model.and_then(|m| m.release_type).map(|v| v.as_str())),
        data_source: or_unspecified(model.and_then(|m| m.data_source).map(|v| v.as_str())),
        access_type: or_unspecified(model.and_then(|m| m.access_type).map(|v| v.as_str())),
        accounting_keywords,
        implementation_keywords,
        has_more_info,
    }
}

impl RowProjection {
    /// Text fields of the row, for global search.
    pub fn text_fields(&self) -> Vec<&str> {
        let mut out = vec![
            self.id.as_str(),
            &self.name,
            &self.curator,
            &self.description,
            &self.flavor_label,
            &self.parameters_summary,
            &self.model_label,
            &self.release_type,
            &self.data_source,
            &self.access_type,
        ];
        out.extend(self.privacy_unit.as_deref());
        out.extend(self.accounting_keywords.iter().map(String::as_str));
        out.extend(self.implementation_keywords.iter().map(String::as_str));
        out
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Entry {
    pub card: DeploymentCard,
    pub row: RowProjection,
    /// Lowercased row and card text, joined by newlines.
    pub haystack: String,
}

/// Read-only snapshot of a corpus. Rebuild to change it.
#[derive(Debug, Clone, Default)]
pub struct RegistryIndex {
    entries: Vec<Entry>,
    by_id: HashMap<String, usize>,
}

impl RegistryIndex {
    /// Builds the snapshot. Later cards with an already-seen id are ignored.
    pub fn new(cards: impl IntoIterator<Item = DeploymentCard>) -> Self {
        let mut index = RegistryIndex::default();
        for card in cards {
            if index.by_id.contains_key(&card.id) {
                continue;
            }
            let row = project_row(&card);
            let mut haystack = row.text_fields().join("\n");
            for text in card.text_fields() {
                haystack.push('\n');
                haystack.push_str(&text);
            }
            let haystack = haystack.to_lowercase();
            index.by_id.insert(card.id.clone(), index.entries.len());
            index.entries.push(Entry { card, row, haystack });
        }
        index
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.by_id.contains_key(id)
    }

    pub fn card(&self, id: &str) -> Option<&DeploymentCard> {
        self.by_id.get(id).map(|&i| &self.entries[i].card)
    }

    pub fn row(&self, id: &str) -> Option<&RowProjection> {
        self.by_id.get(id).map(|&i| &self.entries[i].row)
    }

    pub fn cards(&self) -> impl Iterator<Item = &DeploymentCard> {
        self.entries.iter().map(|e| &e.card)
    }

    pub fn rows(&self) -> impl Iterator<Item = &RowProjection> {
        self.entries.iter().map(|e| &e.row)
    }

    pub(crate) fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// Filters, searches and sorts the table.
    pub fn run_query(&self, q: &Query) -> Result<Vec<RowProjection>, QueryError> {
        query::run(self, q)
    }

    /// Bucketed counts of `variable`, optionally restricted to a year range.
    pub fn aggregate(&self, variable: AggregateVariable, years: Option<YearRange>) -> AggregateResult {
        aggregate::aggregate(self, variable, years)
    }

    /// Overall buckets plus one bucket list per publication year.
    pub fn aggregate_by_year(&self, variable: AggregateVariable) -> AggregateResult {
        aggregate::aggregate_by_year(self, variable)
    }
}
