//! Table queries: per-column filters, a global search box and a sort order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::aggregate::YearRange;
use crate::index::{RegistryIndex, RowProjection};
use crate::tier::TransparencyTier;

/// Filterable and sortable table columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Column {
    Id,
    Name,
    Curator,
    Description,
    PublicationYear,
    Tier,
    FlavorLabel,
    PrivacyUnit,
    ParametersSummary,
    ModelLabel,
    ReleaseType,
    DataSource,
    AccessType,
    AccountingKeywords,
    ImplementationKeywords,
    HasMoreInfo,
}

/// How a column is filtered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    /// Case-insensitive substring.
    Text,
    /// Membership in a set of literals.
    Enum,
    /// Set-valued; matches when any listed keyword is present.
    Keywords,
    Tier,
    Year,
    Flag,
}

impl Column {
    pub const ALL: [Column; 16] = [
        Column::Id,
        Column::Name,
        Column::Curator,
        Column::Description,
        Column::PublicationYear,
        Column::Tier,
        Column::FlavorLabel,
        Column::PrivacyUnit,
        Column::ParametersSummary,
        Column::ModelLabel,
        Column::ReleaseType,
        Column::DataSource,
        Column::AccessType,
        Column::AccountingKeywords,
        Column::ImplementationKeywords,
        Column::HasMoreInfo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Column::Id => "id",
            Column::Name => "name",
            Column::Curator => "curator",
            Column::Description => "description",
            Column::PublicationYear => "publication_year",
            Column::Tier => "tier",
            Column::FlavorLabel => "flavor_label",
            Column::PrivacyUnit => "privacy_unit",
            Column::ParametersSummary => "parameters_summary",
            Column::ModelLabel => "model_label",
            Column::ReleaseType => "release_type",
            Column::DataSource => "data_source",
            Column::AccessType => "access_type",
            Column::AccountingKeywords => "accounting_keywords",
            Column::ImplementationKeywords => "implementation_keywords",
            Column::HasMoreInfo => "has_more_info",
        }
    }

    pub fn kind(self) -> ColumnKind {
        match self {
            Column::Id
            | Column::Name
            | Column::Curator
            | Column::Description
            | Column::PrivacyUnit
            | Column::ParametersSummary => ColumnKind::Text,
            Column::FlavorLabel | Column::ModelLabel | Column::ReleaseType | Column::DataSource | Column::AccessType => {
                ColumnKind::Enum
            }
            Column::AccountingKeywords | Column::ImplementationKeywords => ColumnKind::Keywords,
            Column::Tier => ColumnKind::Tier,
            Column::PublicationYear => ColumnKind::Year,
            Column::HasMoreInfo => ColumnKind::Flag,
        }
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Column {
    type Err = QueryError;

    /// Field names of the row, plus the short aliases `flavor`, `model` and
    /// `year`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let alias = match s {
            "flavor" => Some(Column::FlavorLabel),
            "model" | "deployment_model" => Some(Column::ModelLabel),
            "year" => Some(Column::PublicationYear),
            _ => None,
        };
        alias
            .or_else(|| Column::ALL.into_iter().find(|c| c.as_str() == s))
            .ok_or_else(|| QueryError::UnknownColumn(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Filter {
    /// Any of the needles occurs, case-insensitively.
    Contains(Vec<String>),
    /// Value (or, for keyword columns, any keyword) is one of these.
    OneOf(BTreeSet<String>),
    Tiers(BTreeSet<TransparencyTier>),
    Years(YearRange),
    Flag(bool),
}

impl Filter {
    fn fits(&self, kind: ColumnKind) -> bool {
        matches!(
            (self, kind),
            (Filter::Contains(_), ColumnKind::Text)
                | (Filter::OneOf(_), ColumnKind::Enum | ColumnKind::Keywords)
                | (Filter::Tiers(_), ColumnKind::Tier)
                | (Filter::Years(_), ColumnKind::Year)
                | (Filter::Flag(_), ColumnKind::Flag)
        )
    }

    /// Parses a comma-separated filter value for `column`.
    pub fn parse(column: Column, raw: &str) -> Result<Self, QueryError> {
        let values: Vec<&str> = raw.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
        let invalid = |reason: String| QueryError::InvalidFilter { column, reason };
        Ok(match column.kind() {
            ColumnKind::Text => Filter::Contains(values.into_iter().map(str::to_owned).collect()),
            ColumnKind::Enum | ColumnKind::Keywords => Filter::OneOf(values.into_iter().map(str::to_owned).collect()),
            ColumnKind::Tier => Filter::Tiers(
                values
                    .into_iter()
                    .map(|v| {
                        v.parse::<u8>()
                            .ok()
                            .and_then(TransparencyTier::new)
                            .ok_or_else(|| invalid(format!("`{v}` is not a tier (1, 2 or 3)")))
                    })
                    .collect::<Result<_, _>>()?,
            ),
            ColumnKind::Year => {
                let bound = |v: Option<&&str>| -> Result<Option<i32>, QueryError> {
                    v.map(|v| v.parse().map_err(|_| invalid(format!("`{v}` is not a year"))))
                        .transpose()
                };
                match raw.split_once(',') {
                    Some((min, max)) => Filter::Years(YearRange {
                        min: bound(Some(&min.trim()).filter(|v| !v.is_empty()))?,
                        max: bound(Some(&max.trim()).filter(|v| !v.is_empty()))?,
                    }),
                    None => {
                        let year = bound(values.first())?;
                        Filter::Years(YearRange { min: year, max: year })
                    }
                }
            }
            ColumnKind::Flag => match values.as_slice() {
                ["true"] => Filter::Flag(true),
                ["false"] => Filter::Flag(false),
                _ => return Err(invalid(format!("`{raw}` is not true or false"))),
            },
        })
    }

    fn matches(&self, column: Column, row: &RowProjection) -> bool {
        match self {
            Filter::Contains(needles) => {
                if needles.is_empty() {
                    return true;
                }
                let hay = text_of(column, row).unwrap_or_default().to_lowercase();
                needles.iter().any(|n| hay.contains(&n.to_lowercase()))
            }
            Filter::OneOf(allowed) => {
                if allowed.is_empty() {
                    return true;
                }
                let allowed: BTreeSet<String> = allowed.iter().map(|a| a.to_lowercase()).collect();
                match column {
                    Column::AccountingKeywords => row.accounting_keywords.iter().any(|k| allowed.contains(k)),
                    Column::ImplementationKeywords => row.implementation_keywords.iter().any(|k| allowed.contains(k)),
                    _ => text_of(column, row).is_some_and(|v| allowed.contains(&v.to_lowercase())),
                }
            }
            Filter::Tiers(tiers) => tiers.is_empty() || row.tier.is_some_and(|t| tiers.contains(&t)),
            Filter::Years(range) => row.publication_year.is_some_and(|y| range.contains(y)),
            Filter::Flag(flag) => row.has_more_info == *flag,
        }
    }
}

fn text_of(column: Column, row: &RowProjection) -> Option<&str> {
    Some(match column {
        Column::Id => &row.id,
        Column::Name => &row.name,
        Column::Curator => &row.curator,
        Column::Description => &row.description,
        Column::PrivacyUnit => return row.privacy_unit.as_deref(),
        Column::ParametersSummary => &row.parameters_summary,
        Column::FlavorLabel => &row.flavor_label,
        Column::ModelLabel => &row.model_label,
        Column::ReleaseType => &row.release_type,
        Column::DataSource => &row.data_source,
        Column::AccessType => &row.access_type,
        _ => return None,
    })
}

/// Natural order of one column. Text compares case-insensitively first;
/// absent values sort before present ones.
pub fn compare_column(column: Column, a: &RowProjection, b: &RowProjection) -> Ordering {
    fn text(a: &str, b: &str) -> Ordering {
        a.to_lowercase().cmp(&b.to_lowercase()).then_with(|| a.cmp(b))
    }
    match column {
        Column::PublicationYear => a.publication_year.cmp(&b.publication_year),
        Column::Tier => a.tier.cmp(&b.tier),
        Column::AccountingKeywords => a.accounting_keywords.cmp(&b.accounting_keywords),
        Column::ImplementationKeywords => a.implementation_keywords.cmp(&b.implementation_keywords),
        Column::HasMoreInfo => a.has_more_info.cmp(&b.has_more_info),
        Column::PrivacyUnit => match (&a.privacy_unit, &b.privacy_unit) {
            (Some(x), Some(y)) => text(x, y),
            (x, y) => x.is_some().cmp(&y.is_some()),
        },
        _ => text(text_of(column, a).unwrap_or_default(), text_of(column, b).unwrap_or_default()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SortDirection {
    #[default]
    Ascending,
    Descending,
}

impl FromStr for SortDirection {
    type Err = QueryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "asc" => Ok(SortDirection::Ascending),
            "desc" => Ok(SortDirection::Descending),
            other => Err(QueryError::InvalidParameter {
                name: "order".into(),
                value: other.to_owned(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sort {
    pub column: Column,
    pub direction: SortDirection,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Query {
    pub global_search: Option<String>,
    pub column_filters: BTreeMap<Column, Filter>,
    pub sort: Option<Sort>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("invalid filter for column `{column}`: {reason}")]
    InvalidFilter { column: Column, reason: String },
    #[error("invalid value `{value}` for parameter `{name}`")]
    InvalidParameter { name: String, value: String },
}

impl Query {
    pub fn search(mut self, text: impl Into<String>) -> Self {
        self.global_search = Some(text.into());
        self
    }

    pub fn filter(mut self, column: Column, filter: Filter) -> Self {
        self.column_filters.insert(column, filter);
        self
    }

    pub fn sort_by(mut self, column: Column, direction: SortDirection) -> Self {
        self.sort = Some(Sort { column, direction });
        self
    }

    /// Builds a query from URL parameters: `q`, `sort`, `order`,
    /// `filter.<column>=v1,v2`, `year_from` and `year_to`.
    ///
    /// Unrecognized parameter names are ignored; unrecognized column names
    /// are an error.
    pub fn from_params<'a>(params: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self, QueryError> {
        let mut q = Query::default();
        let mut sort = None;
        let mut order = SortDirection::default();
        let mut years = YearRange::default();
        let year = |name: &str, v: &str| {
            v.parse::<i32>().map_err(|_| QueryError::InvalidParameter {
                name: name.to_owned(),
                value: v.to_owned(),
            })
        };
        for (key, value) in params {
            match key {
                "q" => q.global_search = Some(value.to_owned()).filter(|v| !v.is_empty()),
                "sort" => sort = Some(value.parse::<Column>()?),
                "order" => order = value.parse()?,
                "year_from" if !value.is_empty() => years.min = Some(year(key, value)?),
                "year_to" if !value.is_empty() => years.max = Some(year(key, value)?),
                _ => {
                    if let Some(name) = key.strip_prefix("filter.") {
                        let column: Column = name.parse()?;
                        q.column_filters.insert(column, Filter::parse(column, value)?);
                    }
                }
            }
        }
        if years != YearRange::default() {
            q.column_filters.insert(Column::PublicationYear, Filter::Years(years));
        }
        q.sort = sort.map(|column| Sort { column, direction: order });
        Ok(q)
    }

    fn check(&self) -> Result<(), QueryError> {
        for (&column, filter) in &self.column_filters {
            if !filter.fits(column.kind()) {
                return Err(QueryError::InvalidFilter {
                    column,
                    reason: format!("{:?} filters do not apply to {:?} columns", filter, column.kind()),
                });
            }
        }
        Ok(())
    }
}

pub(crate) fn run(index: &RegistryIndex, q: &Query) -> Result<Vec<RowProjection>, QueryError> {
    q.check()?;
    let needle = q.global_search.as_deref().map(str::to_lowercase).filter(|n| !n.is_empty());
    let mut rows: Vec<&RowProjection> = index
        .entries()
        .iter()
        .filter(|e| needle.as_deref().is_none_or(|n| e.haystack.contains(n)))
        .filter(|e| q.column_filters.iter().all(|(&c, f)| f.matches(c, &e.row)))
        .map(|e| &e.row)
        .collect();

    let sort = q.sort.unwrap_or(Sort {
        column: Column::Name,
        direction: SortDirection::Ascending,
    });
    rows.sort_by(|a, b| {
        let primary = compare_column(sort.column, a, b);
        let primary = match sort.direction {
            SortDirection::Ascending => primary,
            SortDirection::Descending => primary.reverse(),
        };
        primary.then_with(|| a.id.cmp(&b.id))
    });
    Ok(rows.into_iter().cloned().collect())
}
