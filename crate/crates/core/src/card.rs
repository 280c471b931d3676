//! Deployment-card domain types.
//!
//! A card is a plain value. Every field a tier might require is optional at
//! the type level so that incomplete cards can be represented and reported
//! on; the structural and tier rules live in [`crate::validate`].

use std::fmt;
use std::str::FromStr;

use crate::tier::TransparencyTier;

/// Schema version written by this crate and the only one it accepts.
pub const SCHEMA_VERSION: &str = "1.0";

/// A closed string vocabulary was given a literal outside of it.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("`{literal}` is not one of: {expected}")]
pub struct UnknownLiteral {
    pub literal: String,
    pub expected: &'static str,
}

macro_rules! literal_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $lit:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];
            const EXPECTED: &'static str = concat!($("\"", $lit, "\" "),+);

            /// The literal used in card files and API responses.
            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $lit),+
                }
            }
        }

        impl FromStr for $name {
            type Err = UnknownLiteral;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($lit => Ok($name::$variant),)+
                    _ => Err(UnknownLiteral { literal: s.to_owned(), expected: Self::EXPECTED.trim_end() }),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

literal_enum! {
    /// Variant of differential privacy the guarantee is stated in.
    FlavorName {
        Pure => "pure",
        Approximate => "approximate",
        ZeroConcentrated => "zero_concentrated",
        Renyi => "renyi",
        Other => "other",
    }
}

literal_enum! {
    ParameterSymbol {
        Epsilon => "epsilon",
        Delta => "delta",
        Rho => "rho",
        Alpha => "alpha",
        Other => "other",
    }
}

literal_enum! {
    /// What a privacy-parameter value is budgeted over.
    ParameterScope {
        Total => "total",
        PerRelease => "per_release",
        PerQuery => "per_query",
        Unspecified => "unspecified",
    }
}

literal_enum! {
    ModelName {
        Central => "central",
        Local => "local",
        Shuffle => "shuffle",
        Other => "other",
    }
}

literal_enum! {
    ReleaseType {
        OneRelease => "one_release",
        ManyReleases => "many_releases",
    }
}

literal_enum! {
    DataSource {
        Static => "static",
        Dynamic => "dynamic",
    }
}

literal_enum! {
    AccessType {
        Interactive => "interactive",
        NonInteractive => "non_interactive",
    }
}

impl ParameterSymbol {
    /// Short mathematical symbol used in table summaries.
    pub fn glyph(self) -> &'static str {
        match self {
            ParameterSymbol::Epsilon => "ε",
            ParameterSymbol::Delta => "δ",
            ParameterSymbol::Rho => "ρ",
            ParameterSymbol::Alpha => "α",
            ParameterSymbol::Other => "?",
        }
    }
}

/// Sector of the data product.
///
/// Serialized as its literal, or `other:<label>` for sectors outside the
/// closed list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sector {
    Technology,
    Government,
    Healthcare,
    Education,
    Energy,
    Nonprofit,
    Finance,
    Other(String),
}

impl Sector {
    pub const OTHER_PREFIX: &'static str = "other:";
    const EXPECTED: &'static str = "\"technology\" \"government\" \"healthcare\" \"education\" \
                                    \"energy\" \"nonprofit\" \"finance\" \"other:<label>\"";

    /// Vocabulary key; every `other:` sector shares the key `other`.
    pub fn key(&self) -> &'static str {
        match self {
            Sector::Technology => "technology",
            Sector::Government => "government",
            Sector::Healthcare => "healthcare",
            Sector::Education => "education",
            Sector::Energy => "energy",
            Sector::Nonprofit => "nonprofit",
            Sector::Finance => "finance",
            Sector::Other(_) => "other",
        }
    }

    pub fn literal(&self) -> String {
        match self {
            Sector::Other(label) => format!("{}{label}", Self::OTHER_PREFIX),
            known => known.key().to_owned(),
        }
    }
}

impl FromStr for Sector {
    type Err = UnknownLiteral;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "technology" => Sector::Technology,
            "government" => Sector::Government,
            "healthcare" => Sector::Healthcare,
            "education" => Sector::Education,
            "energy" => Sector::Energy,
            "nonprofit" => Sector::Nonprofit,
            "finance" => Sector::Finance,
            other => match other.strip_prefix(Self::OTHER_PREFIX) {
                Some(label) => Sector::Other(label.to_owned()),
                None => {
                    return Err(UnknownLiteral {
                        literal: s.to_owned(),
                        expected: Self::EXPECTED,
                    })
                }
            },
        })
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.literal())
    }
}

/// A non-negative privacy-parameter value kept as its decimal text.
///
/// The text is what gets written back out, so a value such as `1e-10` is
/// re-emitted exactly as it was read.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParameterValue(String);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("`{0}` is not a JSON number literal")]
pub struct InvalidNumber(pub String);

impl ParameterValue {
    pub fn as_text(&self) -> &str {
        &self.0
    }

    pub fn as_f64(&self) -> f64 {
        // Validated as a JSON number on construction.
        self.0.parse().unwrap_or(f64::NAN)
    }

    pub fn is_negative(&self) -> bool {
        self.0.starts_with('-') && self.as_f64() != 0.0
    }
}

impl FromStr for ParameterValue {
    type Err = InvalidNumber;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match serde_json::from_str::<serde_json::Value>(s) {
            Ok(serde_json::Value::Number(n)) if s.trim() == s => Ok(ParameterValue(n.to_string())),
            _ => Err(InvalidNumber(s.to_owned())),
        }
    }
}

impl fmt::Display for ParameterValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DataProductSection {
    pub name: Option<String>,
    pub curator: Option<String>,
    pub description: Option<String>,
    pub intended_use: Option<String>,
    pub publication_year: Option<i32>,
    pub region: Option<String>,
    pub sector: Option<Sector>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlavorSection {
    pub name: Option<FlavorName>,
    pub other_label: Option<String>,
    pub data_domain: Option<String>,
    pub unprotected_quantities: Option<String>,
}

impl FlavorSection {
    /// Display label: the literal, or the curator's label for `other`.
    pub fn label(&self) -> Option<String> {
        self.name.map(|name| match (name, &self.other_label) {
            (FlavorName::Other, Some(label)) => label.clone(),
            (name, _) => name.as_str().to_owned(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivacyParameter {
    pub symbol: ParameterSymbol,
    pub other_symbol: Option<String>,
    pub value: ParameterValue,
    pub scope: ParameterScope,
    pub notes: Option<String>,
}

impl PrivacyParameter {
    pub fn new(symbol: ParameterSymbol, value: &str, scope: ParameterScope) -> Result<Self, InvalidNumber> {
        Ok(PrivacyParameter {
            symbol,
            other_symbol: None,
            value: value.parse()?,
            scope,
            notes: None,
        })
    }

    /// E.g. `ε=1.0 (total)`; unspecified scope carries no suffix.
    pub fn summary(&self) -> String {
        let symbol = match (self.symbol, &self.other_symbol) {
            (ParameterSymbol::Other, Some(s)) => s.as_str(),
            (symbol, _) => symbol.glyph(),
        };
        match self.scope {
            ParameterScope::Unspecified => format!("{symbol}={}", self.value),
            scope => format!("{symbol}={} ({})", self.value, scope.as_str().replace('_', " ")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrivacyLossSection {
    pub privacy_unit: Option<String>,
    pub adjacency_specification: Option<String>,
    pub parameters: Vec<PrivacyParameter>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DeploymentModelSection {
    pub model: Option<ModelName>,
    pub other_label: Option<String>,
    pub trust_assumptions: Option<String>,
    pub release_type: Option<ReleaseType>,
    pub release_details: Option<String>,
    pub data_source: Option<DataSource>,
    pub access_type: Option<AccessType>,
    pub access_details: Option<String>,
}

impl DeploymentModelSection {
    pub fn label(&self) -> Option<String> {
        self.model.map(|model| match (model, &self.other_label) {
            (ModelName::Other, Some(label)) => label.clone(),
            (model, _) => model.as_str().to_owned(),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AccountingSection {
    pub composition: Option<String>,
    pub post_processing: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ImplementationSection {
    pub pre_processing: Option<String>,
    pub mechanisms: Option<String>,
    pub justification: Option<String>,
    pub code_link: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MoreInfoSection {
    pub sources: Vec<String>,
    pub data_product_link: Option<String>,
    pub notes: Option<String>,
}

/// The full record of one deployment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeploymentCard {
    pub id: String,
    pub schema_version: String,
    pub declared_tier: TransparencyTier,
    pub data_product: DataProductSection,
    pub flavor: Option<FlavorSection>,
    pub privacy_loss: Option<PrivacyLossSection>,
    pub deployment_model: Option<DeploymentModelSection>,
    pub accounting: Option<AccountingSection>,
    pub implementation: Option<ImplementationSection>,
    pub more_info: Option<MoreInfoSection>,
}

impl DeploymentCard {
    /// An otherwise empty card with the current schema version.
    pub fn new(id: impl Into<String>, declared_tier: TransparencyTier) -> Self {
        DeploymentCard {
            id: id.into(),
            schema_version: SCHEMA_VERSION.to_owned(),
            declared_tier,
            data_product: DataProductSection::default(),
            flavor: None,
            privacy_loss: None,
            deployment_model: None,
            accounting: None,
            implementation: None,
            more_info: None,
        }
    }

    /// Canonical shape: empty strings become absent, empty sources are
    /// dropped, and sections with nothing in them become absent.
    ///
    /// Parsing always yields a normalized card, so `parse(serialize(c)) == c`
    /// holds exactly for normalized cards.
    pub fn normalized(mut self) -> Self {
        fn clean(field: &mut Option<String>) {
            if field.as_deref() == Some("") {
                *field = None;
            }
        }

        let dp = &mut self.data_product;
        for field in [&mut dp.name, &mut dp.curator, &mut dp.description, &mut dp.intended_use, &mut dp.region] {
            clean(field);
        }

        if let Some(f) = &mut self.flavor {
            for field in [&mut f.other_label, &mut f.data_domain, &mut f.unprotected_quantities] {
                clean(field);
            }
        }
        if self.flavor.as_ref().is_some_and(|f| *f == FlavorSection::default()) {
            self.flavor = None;
        }

        if let Some(pl) = &mut self.privacy_loss {
            clean(&mut pl.privacy_unit);
            clean(&mut pl.adjacency_specification);
            for p in &mut pl.parameters {
                clean(&mut p.other_symbol);
                clean(&mut p.notes);
            }
        }
        if self.privacy_loss.as_ref().is_some_and(|s| *s == PrivacyLossSection::default()) {
            self.privacy_loss = None;
        }

        if let Some(m) = &mut self.deployment_model {
            for field in [
                &mut m.other_label,
                &mut m.trust_assumptions,
                &mut m.release_details,
                &mut m.access_details,
            ] {
                clean(field);
            }
        }
        if self.deployment_model.as_ref().is_some_and(|s| *s == DeploymentModelSection::default()) {
            self.deployment_model = None;
        }

        if let Some(a) = &mut self.accounting {
            clean(&mut a.composition);
            clean(&mut a.post_processing);
        }
        if self.accounting.as_ref().is_some_and(|s| *s == AccountingSection::default()) {
            self.accounting = None;
        }

        if let Some(i) = &mut self.implementation {
            for field in [&mut i.pre_processing, &mut i.mechanisms, &mut i.justification, &mut i.code_link] {
                clean(field);
            }
        }
        if self.implementation.as_ref().is_some_and(|s| *s == ImplementationSection::default()) {
            self.implementation = None;
        }

        if let Some(m) = &mut self.more_info {
            m.sources.retain(|s| !s.is_empty());
            clean(&mut m.data_product_link);
            clean(&mut m.notes);
        }
        if self.more_info.as_ref().is_some_and(|s| *s == MoreInfoSection::default()) {
            self.more_info = None;
        }

        self
    }

    /// Every free-text and literal value on the card, in schema order.
    pub fn text_fields(&self) -> Vec<String> {
        let mut out = vec![self.id.clone()];
        let dp = &self.data_product;
        out.extend(
            [&dp.name, &dp.curator, &dp.description, &dp.intended_use]
                .into_iter()
                .flatten()
                .cloned(),
        );
        out.extend(dp.publication_year.map(|y| y.to_string()));
        out.extend(dp.region.clone());
        out.extend(dp.sector.as_ref().map(Sector::literal));

        if let Some(f) = &self.flavor {
            out.extend(f.name.map(|n| n.as_str().to_owned()));
            out.extend([&f.other_label, &f.data_domain, &f.unprotected_quantities].into_iter().flatten().cloned());
        }
        if let Some(pl) = &self.privacy_loss {
            out.extend([&pl.privacy_unit, &pl.adjacency_specification].into_iter().flatten().cloned());
            for p in &pl.parameters {
                out.push(p.symbol.as_str().to_owned());
                out.extend(p.other_symbol.clone());
                out.push(p.value.as_text().to_owned());
                out.push(p.scope.as_str().to_owned());
                out.extend(p.notes.clone());
            }
        }
        if let Some(m) = &self.deployment_model {
            out.extend(m.model.map(|v| v.as_str().to_owned()));
            out.extend([&m.other_label, &m.trust_assumptions].into_iter().flatten().cloned());
            out.extend(m.release_type.map(|v| v.as_str().to_owned()));
            out.extend(m.release_details.clone());
            out.extend(m.data_source.map(|v| v.as_str().to_owned()));
            out.extend(m.access_type.map(|v| v.as_str().to_owned()));
            out.extend(m.access_details.clone());
        }
        if let Some(a) = &self.accounting {
            out.extend([&a.composition, &a.post_processing].into_iter().flatten().cloned());
        }
        if let Some(i) = &self.implementation {
            out.extend(
                [&i.pre_processing, &i.mechanisms, &i.justification, &i.code_link]
                    .into_iter()
                    .flatten()
                    .cloned(),
            );
        }
        if let Some(m) = &self.more_info {
            out.extend(m.sources.iter().cloned());
            out.extend([&m.data_product_link, &m.notes].into_iter().flatten().cloned());
        }
        out
    }
}

/// Lowercase slug of a display name, used to detect duplicate names.
///
/// Runs of non-alphanumeric characters collapse to a single `-`.
pub fn slugify(name: &str) -> String {
    let mut slug = String::with_capacity(name.len());
    for c in name.chars().flat_map(char::to_lowercase) {
        if c.is_alphanumeric() {
            slug.push(c);
        } else if !slug.is_empty() && !slug.ends_with('-') {
            slug.push('-');
        }
    }
    while slug.ends_with('-') {
        slug.pop();
    }
    slug
}

/// `[a-z0-9]+(-[a-z0-9]+)*`
pub fn is_slug(s: &str) -> bool {
    !s.is_empty()
        && s.split('-')
            .all(|part| !part.is_empty() && part.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit()))
}
