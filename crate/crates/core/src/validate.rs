//! Structural checks and the transparency-tier rule engine.
//!
//! Tier rules are nested: the requirement table below lists each field at the
//! lowest tier that needs it, and validating at tier `t` checks every row with
//! tier `<= t`. Structural rules apply at every tier.

use std::fmt;

use chrono::Datelike;
use serde::{Deserialize, Serialize};

use crate::card::{
    is_slug, AccessType, DataSource, DeploymentCard, FlavorName, ModelName, ParameterSymbol, ReleaseType,
    SCHEMA_VERSION,
};
use crate::tier::TransparencyTier;

/// Earliest accepted publication year.
pub const MIN_PUBLICATION_YEAR: i32 = 1990;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub rule_id: String,
    pub severity: Severity,
    pub field_path: String,
    pub message: String,
}

impl ValidationIssue {
    pub fn error(rule_id: &str, field_path: impl Into<String>, message: impl Into<String>) -> Self {
        ValidationIssue {
            rule_id: rule_id.to_owned(),
            severity: Severity::Error,
            field_path: field_path.into(),
            message: message.into(),
        }
    }

    pub fn warning(rule_id: &str, field_path: impl Into<String>, message: impl Into<String>) -> Self {
        ValidationIssue {
            severity: Severity::Warning,
            ..Self::error(rule_id, field_path, message)
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let severity = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{severity} [{}] {}: {}", self.rule_id, self.field_path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub issues: Vec<ValidationIssue>,
    pub inferred_tier: Option<TransparencyTier>,
}

impl ValidationReport {
    fn from_issues(mut issues: Vec<ValidationIssue>, inferred_tier: Option<TransparencyTier>) -> Self {
        issues.sort_by(|a, b| {
            (&a.field_path, &a.rule_id, &a.message).cmp(&(&b.field_path, &b.rule_id, &b.message))
        });
        issues.dedup();
        ValidationReport {
            passed: !issues.iter().any(ValidationIssue::is_error),
            issues,
            inferred_tier,
        }
    }

    pub fn errors(&self) -> impl Iterator<Item = &ValidationIssue> {
        self.issues.iter().filter(|i| i.is_error())
    }
}

/// One required field of the tier table.
pub struct Requirement {
    pub tier: TransparencyTier,
    pub field_path: &'static str,
    present: fn(&DeploymentCard) -> bool,
}

impl Requirement {
    pub fn is_satisfied(&self, card: &DeploymentCard) -> bool {
        (self.present)(card)
    }
}

macro_rules! req {
    ($tier:ident, $path:literal, |$c:ident| $body:expr) => {
        Requirement {
            tier: TransparencyTier::$tier,
            field_path: $path,
            present: |$c: &DeploymentCard| $body,
        }
    };
}

/// The tier table, in schema order.
pub static REQUIREMENTS: &[Requirement] = &[
    req!(ONE, "data_product.name", |c| c.data_product.name.is_some()),
    req!(ONE, "data_product.curator", |c| c.data_product.curator.is_some()),
    req!(ONE, "data_product.description", |c| c.data_product.description.is_some()),
    req!(ONE, "data_product.intended_use", |c| c.data_product.intended_use.is_some()),
    req!(ONE, "data_product.publication_year", |c| c.data_product.publication_year.is_some()),
    req!(ONE, "data_product.region", |c| c.data_product.region.is_some()),
    req!(ONE, "data_product.sector", |c| c.data_product.sector.is_some()),
    req!(TWO, "flavor.name", |c| c.flavor.as_ref().is_some_and(|f| f.name.is_some())),
    req!(THREE, "flavor.data_domain", |c| c.flavor.as_ref().is_some_and(|f| f.data_domain.is_some())),
    req!(THREE, "flavor.unprotected_quantities", |c| c
        .flavor
        .as_ref()
        .is_some_and(|f| f.unprotected_quantities.is_some())),
    req!(TWO, "privacy_loss.privacy_unit", |c| c
        .privacy_loss
        .as_ref()
        .is_some_and(|p| p.privacy_unit.is_some())),
    req!(THREE, "privacy_loss.adjacency_specification", |c| c
        .privacy_loss
        .as_ref()
        .is_some_and(|p| p.adjacency_specification.is_some())),
    req!(TWO, "privacy_loss.parameters", |c| c
        .privacy_loss
        .as_ref()
        .is_some_and(|p| !p.parameters.is_empty())),
    req!(TWO, "deployment_model.model", |c| c.deployment_model.as_ref().is_some_and(|m| m.model.is_some())),
    req!(THREE, "deployment_model.trust_assumptions", |c| c
        .deployment_model
        .as_ref()
        .is_some_and(|m| m.trust_assumptions.is_some())),
    req!(TWO, "deployment_model.release_type", |c| c
        .deployment_model
        .as_ref()
        .is_some_and(|m| m.release_type.is_some())),
    req!(THREE, "deployment_model.release_details", |c| c
        .deployment_model
        .as_ref()
        .is_some_and(|m| m.release_details.is_some())),
    req!(TWO, "deployment_model.data_source", |c| c
        .deployment_model
        .as_ref()
        .is_some_and(|m| m.data_source.is_some())),
    req!(TWO, "deployment_model.access_type", |c| c
        .deployment_model
        .as_ref()
        .is_some_and(|m| m.access_type.is_some())),
    // Only interactive deployments have an analyst budget to describe.
    req!(THREE, "deployment_model.access_details", |c| c.deployment_model.as_ref().is_some_and(|m| {
        m.access_type != Some(AccessType::Interactive) || m.access_details.is_some()
    })),
    req!(THREE, "accounting.composition", |c| c.accounting.as_ref().is_some_and(|a| a.composition.is_some())),
    req!(THREE, "accounting.post_processing", |c| c
        .accounting
        .as_ref()
        .is_some_and(|a| a.post_processing.is_some())),
    req!(THREE, "implementation.pre_processing", |c| c
        .implementation
        .as_ref()
        .is_some_and(|i| i.pre_processing.is_some())),
    req!(THREE, "implementation.mechanisms", |c| c
        .implementation
        .as_ref()
        .is_some_and(|i| i.mechanisms.is_some())),
    req!(THREE, "implementation.justification", |c| c
        .implementation
        .as_ref()
        .is_some_and(|i| i.justification.is_some())),
];

/// Requirements checked when validating at `tier`.
pub fn requirements_for(tier: TransparencyTier) -> impl Iterator<Item = &'static Requirement> {
    REQUIREMENTS.iter().filter(move |r| r.tier <= tier)
}

fn current_year() -> i32 {
    chrono::Utc::now().year()
}

fn is_absolute_url(text: &str) -> bool {
    url::Url::parse(text).is_ok_and(|u| matches!(u.scheme(), "http" | "https") && u.host().is_some())
}

/// Tier-independent violations, using the clock for the upper year bound.
pub fn structural_check(card: &DeploymentCard) -> Vec<ValidationIssue> {
    structural_check_at(card, current_year())
}

/// Tier-independent violations with an explicit current year.
pub fn structural_check_at(card: &DeploymentCard, current_year: i32) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();

    if !is_slug(&card.id) {
        issues.push(ValidationIssue::error(
            "slug-grammar",
            "id",
            format!("`{}` is not a lowercase slug ([a-z0-9]+(-[a-z0-9]+)*)", card.id),
        ));
    }
    if card.schema_version != SCHEMA_VERSION {
        issues.push(ValidationIssue::error(
            "schema-version",
            "schema_version",
            format!("unsupported schema version `{}`, expected `{SCHEMA_VERSION}`", card.schema_version),
        ));
    }

    if let Some(year) = card.data_product.publication_year {
        let max = current_year + 1;
        if !(MIN_PUBLICATION_YEAR..=max).contains(&year) {
            issues.push(ValidationIssue::error(
                "year-range",
                "data_product.publication_year",
                format!("{year} is outside [{MIN_PUBLICATION_YEAR}, {max}]"),
            ));
        }
    }
    if let Some(crate::card::Sector::Other(label)) = &card.data_product.sector {
        if label.trim().is_empty() {
            issues.push(ValidationIssue::error(
                "other-label-required",
                "data_product.sector",
                "sector `other:` needs a label",
            ));
        }
    }

    if let Some(flavor) = &card.flavor {
        if flavor.name == Some(FlavorName::Other) && flavor.other_label.is_none() {
            issues.push(ValidationIssue::error(
                "other-label-required",
                "flavor.other_label",
                "flavor `other` needs other_label",
            ));
        }
    }

    if let Some(loss) = &card.privacy_loss {
        let mut seen = Vec::with_capacity(loss.parameters.len());
        let mut duplicated = Vec::new();
        for (i, p) in loss.parameters.iter().enumerate() {
            if p.value.is_negative() {
                issues.push(ValidationIssue::error(
                    "negative-parameter",
                    format!("privacy_loss.parameters[{i}].value"),
                    format!("privacy parameters are non-negative, got {}", p.value),
                ));
            }
            if p.symbol == ParameterSymbol::Other && p.other_symbol.is_none() {
                issues.push(ValidationIssue::error(
                    "other-symbol-required",
                    format!("privacy_loss.parameters[{i}].other_symbol"),
                    "symbol `other` needs other_symbol",
                ));
            }
            let key = (p.symbol, p.other_symbol.as_deref(), p.scope);
            if seen.contains(&key) {
                if !duplicated.contains(&key) {
                    duplicated.push(key);
                }
            } else {
                seen.push(key);
            }
        }
        for (symbol, other, scope) in duplicated {
            issues.push(ValidationIssue::error(
                "duplicate-parameter",
                "privacy_loss.parameters",
                format!("more than one {} parameter with scope {scope}", other.unwrap_or(symbol.as_str())),
            ));
        }
    }

    if let Some(model) = &card.deployment_model {
        if model.model == Some(ModelName::Other) && model.other_label.is_none() {
            issues.push(ValidationIssue::error(
                "other-label-required",
                "deployment_model.other_label",
                "deployment model `other` needs other_label",
            ));
        }
        if model.data_source == Some(DataSource::Dynamic) && model.release_type == Some(ReleaseType::OneRelease) {
            issues.push(ValidationIssue::error(
                "dynamic-implies-many",
                "deployment_model.release_type",
                "a dynamic data source is always released many times",
            ));
        }
    }

    if let Some(link) = card.implementation.as_ref().and_then(|i| i.code_link.as_deref()) {
        if !is_absolute_url(link) {
            issues.push(ValidationIssue::error(
                "url-shape",
                "implementation.code_link",
                format!("`{link}` is not an absolute http(s) URL"),
            ));
        }
    }
    if let Some(more) = &card.more_info {
        for (i, source) in more.sources.iter().enumerate() {
            if !is_absolute_url(source) {
                issues.push(ValidationIssue::error(
                    "url-shape",
                    format!("more_info.sources[{i}]"),
                    format!("`{source}` is not an absolute http(s) URL"),
                ));
            }
        }
        if let Some(link) = &more.data_product_link {
            if !is_absolute_url(link) {
                issues.push(ValidationIssue::error(
                    "url-shape",
                    "more_info.data_product_link",
                    format!("`{link}` is not an absolute http(s) URL"),
                ));
            }
        }
    }

    issues
}

fn missing_at(card: &DeploymentCard, tier: TransparencyTier) -> impl Iterator<Item = ValidationIssue> + '_ {
    requirements_for(tier).filter(|r| !r.is_satisfied(card)).map(|r| {
        ValidationIssue::error(
            &format!("tier-{}-required", r.tier),
            r.field_path,
            format!("required at tier {}", r.tier),
        )
    })
}

fn highest_passing(card: &DeploymentCard, structural_ok: bool) -> Option<TransparencyTier> {
    if !structural_ok {
        return None;
    }
    TransparencyTier::ALL
        .into_iter()
        .take_while(|&t| missing_at(card, t).next().is_none())
        .last()
}

/// Highest tier whose rules the card satisfies, if any.
pub fn infer_tier(card: &DeploymentCard) -> Option<TransparencyTier> {
    infer_tier_at(card, current_year())
}

pub fn infer_tier_at(card: &DeploymentCard, current_year: i32) -> Option<TransparencyTier> {
    let structural_ok = !structural_check_at(card, current_year).iter().any(ValidationIssue::is_error);
    highest_passing(card, structural_ok)
}

/// Checks the card against the rules of `tier` plus every structural rule.
pub fn validate_at_tier(card: &DeploymentCard, tier: TransparencyTier) -> ValidationReport {
    validate_at_tier_at(card, tier, current_year())
}

pub fn validate_at_tier_at(card: &DeploymentCard, tier: TransparencyTier, current_year: i32) -> ValidationReport {
    let mut issues = structural_check_at(card, current_year);
    let structural_ok = !issues.iter().any(ValidationIssue::is_error);
    let inferred = highest_passing(card, structural_ok);
    issues.extend(missing_at(card, tier));
    ValidationReport::from_issues(issues, inferred)
}

/// Validation at the card's own declared tier.
///
/// A card is admissible to a corpus exactly when this report passes. Cards
/// that disclose more than they declare pass with an `understated-tier`
/// warning.
pub fn admission_report(card: &DeploymentCard) -> ValidationReport {
    let mut report = validate_at_tier(card, card.declared_tier);
    if let Some(inferred) = report.inferred_tier.filter(|&t| t > card.declared_tier) {
        report.issues.push(ValidationIssue::warning(
            "understated-tier",
            "declared_tier",
            format!("declared tier {} but the card satisfies tier {inferred}", card.declared_tier),
        ));
        report = ValidationReport::from_issues(report.issues, report.inferred_tier);
    }
    report
}

pub fn is_admissible(card: &DeploymentCard) -> bool {
    admission_report(card).passed
}
