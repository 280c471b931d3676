//! Reference implementations used as oracles by the property tests.
//!
//! Everything here is written against the card's JSON form or the row's
//! public fields, without reusing the library's query, aggregation or
//! requirement code.

#![allow(dead_code)]

use std::collections::HashMap;

use dp_registry::card::{AccessType, DeploymentCard};
use dp_registry::io::card_to_value;
use dp_registry::query::{Column, Filter, Query, SortDirection};
use dp_registry::{AggregateResult, AggregateVariable, Bucket, RowProjection, TransparencyTier, YearRange};
use serde_json::Value;

/// Scalar leaves of a JSON value rendered as text.
fn leaves(value: &Value, skip: &[&str], out: &mut Vec<String>) {
    match value {
        Value::String(s) => out.push(s.clone()),
        Value::Number(n) => out.push(n.to_string()),
        Value::Array(items) => items.iter().for_each(|v| leaves(v, skip, out)),
        Value::Object(map) => {
            for (k, v) in map {
                if !skip.contains(&k.as_str()) {
                    leaves(v, skip, out);
                }
            }
        }
        Value::Bool(_) | Value::Null => {}
    }
}

/// Searchable text of a card and its row, one string per field.
pub fn searchable_fields(card: &DeploymentCard, row: &RowProjection) -> Vec<String> {
    let mut out = Vec::new();
    leaves(&card_to_value(card), &["schema_version", "declared_tier"], &mut out);
    let row_value = serde_json::to_value(row).unwrap();
    leaves(&row_value, &["tier", "publication_year", "has_more_info"], &mut out);
    out
}

fn row_text(column: Column, row: &RowProjection) -> Option<String> {
    let value = serde_json::to_value(row).unwrap();
    match &value[column.as_str()] {
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn row_keywords(column: Column, row: &RowProjection) -> Vec<String> {
    let value = serde_json::to_value(row).unwrap();
    value[column.as_str()]
        .as_array()
        .map(|a| a.iter().filter_map(|v| v.as_str().map(str::to_owned)).collect())
        .unwrap_or_default()
}

fn filter_admits(column: Column, filter: &Filter, row: &RowProjection) -> bool {
    match filter {
        Filter::Contains(needles) => {
            needles.is_empty()
                || row_text(column, row).is_some_and(|t| {
                    let t = t.to_lowercase();
                    needles.iter().any(|n| t.contains(&n.to_lowercase()))
                })
        }
        Filter::OneOf(allowed) => {
            if allowed.is_empty() {
                return true;
            }
            let allowed: Vec<String> = allowed.iter().map(|a| a.to_lowercase()).collect();
            match column {
                Column::AccountingKeywords | Column::ImplementationKeywords => {
                    row_keywords(column, row).iter().any(|k| allowed.contains(k))
                }
                _ => row_text(column, row).is_some_and(|t| allowed.contains(&t.to_lowercase())),
            }
        }
        Filter::Tiers(tiers) => tiers.is_empty() || row.tier.is_some_and(|t| tiers.contains(&t)),
        Filter::Years(range) => match row.publication_year {
            None => false,
            Some(y) => range.min.map_or(true, |m| y >= m) && range.max.map_or(true, |m| y <= m),
        },
        Filter::Flag(flag) => row.has_more_info == *flag,
    }
}

/// Sort key of one column. Text sorts case-insensitively, then by raw text.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Absent,
    Number(i64),
    Text(String, String),
    List(Vec<String>),
}

fn sort_key(column: Column, row: &RowProjection) -> Key {
    match column {
        Column::PublicationYear => row.publication_year.map_or(Key::Absent, |y| Key::Number(y.into())),
        Column::Tier => row.tier.map_or(Key::Absent, |t| Key::Number(t.level().into())),
        Column::HasMoreInfo => Key::Number(row.has_more_info.into()),
        Column::AccountingKeywords | Column::ImplementationKeywords => Key::List(row_keywords(column, row)),
        Column::PrivacyUnit => row
            .privacy_unit
            .as_ref()
            .map_or(Key::Absent, |t| Key::Text(t.to_lowercase(), t.clone())),
        _ => {
            let t = row_text(column, row).unwrap_or_default();
            Key::Text(t.to_lowercase(), t)
        }
    }
}

/// Linear scan over `(card, row)` pairs with a two-pass stable sort.
pub fn query_oracle(pairs: &[(DeploymentCard, RowProjection)], q: &Query) -> Vec<RowProjection> {
    let mut out: Vec<RowProjection> = Vec::new();
    for (card, row) in pairs {
        if let Some(needle) = q.global_search.as_deref().filter(|n| !n.is_empty()) {
            let needle = needle.to_lowercase();
            if !searchable_fields(card, row).iter().any(|f| f.to_lowercase().contains(&needle)) {
                continue;
            }
        }
        if q.column_filters.iter().all(|(&c, f)| filter_admits(c, f, row)) {
            out.push(row.clone());
        }
    }
    let (column, direction) = q
        .sort
        .map_or((Column::Name, SortDirection::Ascending), |s| (s.column, s.direction));
    out.sort_by(|a, b| a.id.cmp(&b.id));
    out.sort_by(|a, b| {
        let ord = sort_key(column, a).cmp(&sort_key(column, b));
        match direction {
            SortDirection::Ascending => ord,
            SortDirection::Descending => ord.reverse(),
        }
    });
    out
}

/// Bucket key read from the card's JSON form.
pub fn key_oracle(variable: AggregateVariable, card: &DeploymentCard, tier: Option<TransparencyTier>) -> String {
    let v = card_to_value(card);
    let text = |section: &str, key: &str| v[section][key].as_str().map(str::to_owned);
    let key = match variable {
        AggregateVariable::Tier => tier.map(|t| t.level().to_string()),
        AggregateVariable::Flavor => text("flavor", "name"),
        AggregateVariable::DeploymentModel => text("deployment_model", "model"),
        AggregateVariable::Region => text("data_product", "region"),
        AggregateVariable::Sector => {
            text("data_product", "sector").map(|s| if s.starts_with("other:") { "other".into() } else { s })
        }
        AggregateVariable::ReleaseType => text("deployment_model", "release_type"),
        AggregateVariable::DataSource => text("deployment_model", "data_source"),
        AggregateVariable::AccessType => text("deployment_model", "access_type"),
    };
    key.unwrap_or_else(|| "unspecified".into())
}

fn sorted_buckets(counts: HashMap<String, usize>) -> Vec<Bucket> {
    let mut pairs: Vec<(String, usize)> = counts.into_iter().collect();
    pairs.sort_by(|a, b| (std::cmp::Reverse(a.1), &a.0).cmp(&(std::cmp::Reverse(b.1), &b.0)));
    pairs.into_iter().map(|(key, count)| Bucket { key, count }).collect()
}

pub fn aggregate_oracle(
    pairs: &[(DeploymentCard, RowProjection)],
    variable: AggregateVariable,
    years: Option<YearRange>,
) -> Vec<Bucket> {
    let mut counts = HashMap::new();
    for (card, row) in pairs {
        let keep = match (years, card.data_product.publication_year) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(r), Some(y)) => r.min.map_or(true, |m| y >= m) && r.max.map_or(true, |m| y <= m),
        };
        if keep {
            *counts.entry(key_oracle(variable, card, row.tier)).or_insert(0) += 1;
        }
    }
    sorted_buckets(counts)
}

pub fn by_year_oracle(pairs: &[(DeploymentCard, RowProjection)], variable: AggregateVariable) -> Vec<(i32, Vec<Bucket>)> {
    let mut groups: std::collections::BTreeMap<i32, Vec<(DeploymentCard, RowProjection)>> = Default::default();
    for pair in pairs {
        if let Some(y) = pair.0.data_product.publication_year {
            groups.entry(y).or_default().push(pair.clone());
        }
    }
    groups
        .into_iter()
        .map(|(y, group)| (y, aggregate_oracle(&group, variable, None)))
        .collect()
}

/// Folds per-year buckets over `[min, max]` into one sorted bucket list.
pub fn fold_years(result: &AggregateResult, min: i32, max: i32) -> Vec<Bucket> {
    let mut counts = HashMap::new();
    for entry in result.per_year.as_deref().unwrap_or_default() {
        if entry.year >= min && entry.year <= max {
            for b in &entry.buckets {
                *counts.entry(b.key.clone()).or_insert(0) += b.count;
            }
        }
    }
    sorted_buckets(counts)
}

/// A field whose absence is checked at some tier, and how to remove it.
pub struct RequiredField {
    pub tier: u8,
    pub path: &'static str,
    /// Whether the card currently carries the field in a way that counts.
    pub applies: fn(&DeploymentCard) -> bool,
    pub clear: fn(&mut DeploymentCard),
}

macro_rules! field {
    ($tier:expr, $path:expr, |$c:ident| $clear:expr) => {
        RequiredField {
            tier: $tier,
            path: $path,
            applies: |_| true,
            clear: |$c: &mut DeploymentCard| {
                $clear;
            },
        }
    };
}

/// The required-field list per tier, written out by hand.
pub fn required_fields() -> Vec<RequiredField> {
    vec![
        field!(1, "data_product.name", |c| c.data_product.name = None),
        field!(1, "data_product.curator", |c| c.data_product.curator = None),
        field!(1, "data_product.description", |c| c.data_product.description = None),
        field!(1, "data_product.intended_use", |c| c.data_product.intended_use = None),
        field!(1, "data_product.publication_year", |c| c.data_product.publication_year = None),
        field!(1, "data_product.region", |c| c.data_product.region = None),
        field!(1, "data_product.sector", |c| c.data_product.sector = None),
        field!(2, "flavor.name", |c| if let Some(f) = c.flavor.as_mut() {
            f.name = None;
            f.other_label = None;
        }),
        field!(2, "privacy_loss.privacy_unit", |c| if let Some(p) = c.privacy_loss.as_mut() {
            p.privacy_unit = None
        }),
        field!(2, "privacy_loss.parameters", |c| if let Some(p) = c.privacy_loss.as_mut() {
            p.parameters.clear()
        }),
        field!(2, "deployment_model.model", |c| if let Some(m) = c.deployment_model.as_mut() {
            m.model = None;
            m.other_label = None;
        }),
        field!(2, "deployment_model.release_type", |c| if let Some(m) = c.deployment_model.as_mut() {
            m.release_type = None
        }),
        field!(2, "deployment_model.data_source", |c| if let Some(m) = c.deployment_model.as_mut() {
            m.data_source = None
        }),
        field!(2, "deployment_model.access_type", |c| if let Some(m) = c.deployment_model.as_mut() {
            m.access_type = None
        }),
        field!(3, "flavor.data_domain", |c| if let Some(f) = c.flavor.as_mut() {
            f.data_domain = None
        }),
        field!(3, "flavor.unprotected_quantities", |c| if let Some(f) = c.flavor.as_mut() {
            f.unprotected_quantities = None
        }),
        field!(3, "privacy_loss.adjacency_specification", |c| if let Some(p) = c.privacy_loss.as_mut() {
            p.adjacency_specification = None
        }),
        field!(3, "deployment_model.trust_assumptions", |c| if let Some(m) = c.deployment_model.as_mut() {
            m.trust_assumptions = None
        }),
        field!(3, "deployment_model.release_details", |c| if let Some(m) = c.deployment_model.as_mut() {
            m.release_details = None
        }),
        RequiredField {
            tier: 3,
            path: "deployment_model.access_details",
            applies: |c| {
                c.deployment_model
                    .as_ref()
                    .is_some_and(|m| m.access_type == Some(AccessType::Interactive))
            },
            clear: |c| {
                if let Some(m) = c.deployment_model.as_mut() {
                    m.access_details = None;
                }
            },
        },
        field!(3, "accounting.composition", |c| if let Some(a) = c.accounting.as_mut() {
            a.composition = None
        }),
        field!(3, "accounting.post_processing", |c| if let Some(a) = c.accounting.as_mut() {
            a.post_processing = None
        }),
        field!(3, "implementation.pre_processing", |c| if let Some(i) = c.implementation.as_mut() {
            i.pre_processing = None
        }),
        field!(3, "implementation.mechanisms", |c| if let Some(i) = c.implementation.as_mut() {
            i.mechanisms = None
        }),
        field!(3, "implementation.justification", |c| if let Some(i) = c.implementation.as_mut() {
            i.justification = None
        }),
    ]
}
