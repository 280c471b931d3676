//! Card file format: one JSON document per deployment, `<id>.json`.
//!
//! Parsing is strict (unknown keys are rejected at every level) and
//! serialization is canonical: schema key order, two-space indentation and a
//! trailing newline, with absent fields omitted.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{Map, Number, Value};

use crate::card::*;
use crate::tier::TransparencyTier;
use crate::validate::admission_report;

/// Name of the manifest file that may sit next to card files.
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unknown key `{path}`")]
    UnknownKey { path: String },
    #[error("missing required key `{path}`")]
    MissingKey { path: String },
    #[error("`{path}` must be {expected}")]
    WrongType { path: String, expected: &'static str },
    #[error("`{path}`: {message}")]
    EnumOutOfRange { path: String, message: String },
}

impl ParseError {
    /// Stable identifier for the error category.
    pub fn kind(&self) -> &'static str {
        match self {
            ParseError::Syntax { .. } => "malformed-syntax",
            ParseError::UnknownKey { .. } => "unknown-key",
            ParseError::MissingKey { .. } => "missing-key",
            ParseError::WrongType { .. } => "wrong-type",
            ParseError::EnumOutOfRange { .. } => "enum-out-of-range",
        }
    }

    /// Dotted path of the offending key; empty for syntax errors.
    pub fn path(&self) -> &str {
        match self {
            ParseError::Syntax { .. } => "",
            ParseError::UnknownKey { path }
            | ParseError::MissingKey { path }
            | ParseError::WrongType { path, .. }
            | ParseError::EnumOutOfRange { path, .. } => path,
        }
    }
}

/// Object reader that tracks which keys were consumed.
struct Fields<'a> {
    path: String,
    map: &'a Map<String, Value>,
    seen: Vec<&'static str>,
}

impl<'a> Fields<'a> {
    fn new(path: String, value: &'a Value) -> Result<Self, ParseError> {
        match value {
            Value::Object(map) => Ok(Fields {
                path,
                map,
                seen: Vec::new(),
            }),
            _ => Err(ParseError::WrongType {
                path: if path.is_empty() { "$".into() } else { path },
                expected: "an object",
            }),
        }
    }

    fn child(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_owned()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    /// Raw value; JSON `null` counts as absent.
    fn get(&mut self, key: &'static str) -> Option<&'a Value> {
        self.seen.push(key);
        self.map.get(key).filter(|v| !v.is_null())
    }

    fn text(&mut self, key: &'static str) -> Result<Option<String>, ParseError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) if s.is_empty() => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(ParseError::WrongType {
                path: self.child(key),
                expected: "a string",
            }),
        }
    }

    fn required_text(&mut self, key: &'static str) -> Result<String, ParseError> {
        self.text(key)?.ok_or_else(|| ParseError::MissingKey { path: self.child(key) })
    }

    fn literal<T>(&mut self, key: &'static str) -> Result<Option<T>, ParseError>
    where
        T: std::str::FromStr<Err = UnknownLiteral>,
    {
        match self.text(key)? {
            None => Ok(None),
            Some(s) => s.parse().map(Some).map_err(|e: UnknownLiteral| ParseError::EnumOutOfRange {
                path: self.child(key),
                message: e.to_string(),
            }),
        }
    }

    fn required_literal<T>(&mut self, key: &'static str) -> Result<T, ParseError>
    where
        T: std::str::FromStr<Err = UnknownLiteral>,
    {
        self.literal(key)?.ok_or_else(|| ParseError::MissingKey { path: self.child(key) })
    }

    fn integer(&mut self, key: &'static str) -> Result<Option<i64>, ParseError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Number(n)) => n.as_i64().map(Some).ok_or_else(|| ParseError::WrongType {
                path: self.child(key),
                expected: "an integer",
            }),
            Some(_) => Err(ParseError::WrongType {
                path: self.child(key),
                expected: "an integer",
            }),
        }
    }

    fn object(&mut self, key: &'static str) -> Result<Option<Fields<'a>>, ParseError> {
        let path = self.child(key);
        self.get(key).map(|v| Fields::new(path, v)).transpose()
    }

    fn array(&mut self, key: &'static str) -> Result<&'a [Value], ParseError> {
        match self.get(key) {
            None => Ok(&[]),
            Some(Value::Array(items)) => Ok(items),
            Some(_) => Err(ParseError::WrongType {
                path: self.child(key),
                expected: "an array",
            }),
        }
    }

    /// Rejects any key that was never asked for.
    fn finish(self) -> Result<(), ParseError> {
        // Map preserves document order, so the first unknown key is reported.
        match self.map.keys().find(|k| !self.seen.contains(&k.as_str())) {
            Some(key) => Err(ParseError::UnknownKey { path: self.child(key) }),
            None => Ok(()),
        }
    }
}

fn syntax_error(e: serde_json::Error) -> ParseError {
    ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Parses one card document.
pub fn parse_card(document: &str) -> Result<DeploymentCard, ParseError> {
    let value: Value = serde_json::from_str(document).map_err(syntax_error)?;
    card_from_value(&value)
}

/// Converts an already-parsed JSON value into a card.
pub fn card_from_value(value: &Value) -> Result<DeploymentCard, ParseError> {
    let mut root = Fields::new(String::new(), value)?;

    let id = root.required_text("id")?;
    let schema_version = root.required_text("schema_version")?;
    let declared_tier = match root.integer("declared_tier")? {
        None => return Err(ParseError::MissingKey { path: "declared_tier".into() }),
        Some(level) => TransparencyTier::try_from(level).map_err(|e| ParseError::EnumOutOfRange {
            path: "declared_tier".into(),
            message: e.to_string(),
        })?,
    };

    let data_product = match root.object("data_product")? {
        None => DataProductSection::default(),
        Some(mut f) => {
            let section = DataProductSection {
                name: f.text("name")?,
                curator: f.text("curator")?,
                description: f.text("description")?,
                intended_use: f.text("intended_use")?,
                publication_year: match f.integer("publication_year")? {
                    None => None,
                    Some(y) => Some(i32::try_from(y).map_err(|_| ParseError::WrongType {
                        path: "data_product.publication_year".into(),
                        expected: "a year",
                    })?),
                },
                region: f.text("region")?,
                sector: f.literal("sector")?,
            };
            f.finish()?;
            section
        }
    };

    let flavor = match root.object("flavor")? {
        None => None,
        Some(mut f) => {
            let section = FlavorSection {
                name: f.literal("name")?,
                other_label: f.text("other_label")?,
                data_domain: f.text("data_domain")?,
                unprotected_quantities: f.text("unprotected_quantities")?,
            };
            f.finish()?;
            Some(section)
        }
    };

    let privacy_loss = match root.object("privacy_loss")? {
        None => None,
        Some(mut f) => {
            let privacy_unit = f.text("privacy_unit")?;
            let adjacency_specification = f.text("adjacency_specification")?;
            let items = f.array("parameters")?;
            let mut parameters = Vec::with_capacity(items.len());
            for (i, item) in items.iter().enumerate() {
                parameters.push(parse_parameter(format!("privacy_loss.parameters[{i}]"), item)?);
            }
            f.finish()?;
            Some(PrivacyLossSection {
                privacy_unit,
                adjacency_specification,
                parameters,
            })
        }
    };

    let deployment_model = match root.object("deployment_model")? {
        None => None,
        Some(mut f) => {
            let section = DeploymentModelSection {
                model: f.literal("model")?,
                other_label: f.text("other_label")?,
                trust_assumptions: f.text("trust_assumptions")?,
                release_type: f.literal("release_type")?,
                release_details: f.text("release_details")?,
                data_source: f.literal("data_source")?,
                access_type: f.literal("access_type")?,
                access_details: f.text("access_details")?,
            };
            f.finish()?;
            Some(section)
        }
    };

    let accounting = match root.object("accounting")? {
        None => None,
        Some(mut f) => {
            let section = AccountingSection {
                composition: f.text("composition")?,
                post_processing: f.text("post_processing")?,
            };
            f.finish()?;
            Some(section)
        }
    };

    let implementation = match root.object("implementation")? {
        None => None,
        Some(mut f) => {
            let section = ImplementationSection {
                pre_processing: f.text("pre_processing")?,
                mechanisms: f.text("mechanisms")?,
                justification: f.text("justification")?,
                code_link: f.text("code_link")?,
            };
            f.finish()?;
            Some(section)
        }
    };

    let more_info = match root.object("more_info")? {
        None => None,
        Some(mut f) => {
            let items = f.array("sources")?;
            let mut sources = Vec::with_capacity(items.len());
            for (i, item) in items.iter().enumerate() {
                match item {
                    Value::String(s) => sources.push(s.clone()),
                    _ => {
                        return Err(ParseError::WrongType {
                            path: format!("more_info.sources[{i}]"),
                            expected: "a string",
                        })
                    }
                }
            }
            let section = MoreInfoSection {
                sources,
                data_product_link: f.text("data_product_link")?,
                notes: f.text("notes")?,
            };
            f.finish()?;
            Some(section)
        }
    };

    root.finish()?;

    Ok(DeploymentCard {
        id,
        schema_version,
        declared_tier,
        data_product,
        flavor,
        privacy_loss,
        deployment_model,
        accounting,
        implementation,
        more_info,
    }
    .normalized())
}

fn parse_parameter(path: String, value: &Value) -> Result<PrivacyParameter, ParseError> {
    let mut f = Fields::new(path, value)?;
    let symbol = f.required_literal("symbol")?;
    let other_symbol = f.text("other_symbol")?;
    let value = match f.get("value") {
        None => return Err(ParseError::MissingKey { path: f.child("value") }),
        Some(Value::Number(n)) => n
            .to_string()
            .parse::<ParameterValue>()
            .map_err(|_| ParseError::WrongType {
                path: f.child("value"),
                expected: "a number",
            })?,
        Some(_) => {
            return Err(ParseError::WrongType {
                path: f.child("value"),
                expected: "a number",
            })
        }
    };
    let scope = f.required_literal("scope")?;
    let notes = f.text("notes")?;
    f.finish()?;
    Ok(PrivacyParameter {
        symbol,
        other_symbol,
        value,
        scope,
        notes,
    })
}

struct Builder(Map<String, Value>);

impl Builder {
    fn new() -> Self {
        Builder(Map::new())
    }

    fn text(mut self, key: &str, value: &Option<String>) -> Self {
        if let Some(v) = value.as_deref().filter(|v| !v.is_empty()) {
            self.0.insert(key.to_owned(), Value::String(v.to_owned()));
        }
        self
    }

    fn literal(mut self, key: &str, value: Option<&str>) -> Self {
        if let Some(v) = value {
            self.0.insert(key.to_owned(), Value::String(v.to_owned()));
        }
        self
    }

    fn value(mut self, key: &str, value: Value) -> Self {
        self.0.insert(key.to_owned(), value);
        self
    }

    fn section(self, key: &str, section: Option<Builder>) -> Self {
        match section {
            Some(b) if !b.0.is_empty() => self.value(key, Value::Object(b.0)),
            _ => self,
        }
    }

    fn build(self) -> Value {
        Value::Object(self.0)
    }
}

fn number(value: &ParameterValue) -> Value {
    // ParameterValue is validated as a JSON number literal.
    Value::Number(value.as_text().parse::<Number>().expect("parameter value is a JSON number"))
}

/// The card as an ordered JSON value in canonical key order.
pub fn card_to_value(card: &DeploymentCard) -> Value {
    let dp = &card.data_product;
    let mut data_product = Builder::new()
        .text("name", &dp.name)
        .text("curator", &dp.curator)
        .text("description", &dp.description)
        .text("intended_use", &dp.intended_use);
    if let Some(year) = dp.publication_year {
        data_product = data_product.value("publication_year", Value::from(year));
    }
    let data_product = data_product
        .text("region", &dp.region)
        .text("sector", &dp.sector.as_ref().map(Sector::literal));

    let flavor = card.flavor.as_ref().map(|f| {
        Builder::new()
            .literal("name", f.name.map(FlavorName::as_str))
            .text("other_label", &f.other_label)
            .text("data_domain", &f.data_domain)
            .text("unprotected_quantities", &f.unprotected_quantities)
    });

    let privacy_loss = card.privacy_loss.as_ref().map(|p| {
        let b = Builder::new()
            .text("privacy_unit", &p.privacy_unit)
            .text("adjacency_specification", &p.adjacency_specification);
        if p.parameters.is_empty() {
            return b;
        }
        let params = p
            .parameters
            .iter()
            .map(|q| {
                Builder::new()
                    .literal("symbol", Some(q.symbol.as_str()))
                    .text("other_symbol", &q.other_symbol)
                    .value("value", number(&q.value))
                    .literal("scope", Some(q.scope.as_str()))
                    .text("notes", &q.notes)
                    .build()
            })
            .collect();
        b.value("parameters", Value::Array(params))
    });

    let deployment_model = card.deployment_model.as_ref().map(|m| {
        Builder::new()
            .literal("model", m.model.map(ModelName::as_str))
            .text("other_label", &m.other_label)
            .text("trust_assumptions", &m.trust_assumptions)
            .literal("release_type", m.release_type.map(ReleaseType::as_str))
            .text("release_details", &m.release_details)
            .literal("data_source", m.data_source.map(DataSource::as_str))
            .literal("access_type", m.access_type.map(AccessType::as_str))
            .text("access_details", &m.access_details)
    });

    let accounting = card.accounting.as_ref().map(|a| {
        Builder::new()
            .text("composition", &a.composition)
            .text("post_processing", &a.post_processing)
    });

    let implementation = card.implementation.as_ref().map(|i| {
        Builder::new()
            .text("pre_processing", &i.pre_processing)
            .text("mechanisms", &i.mechanisms)
            .text("justification", &i.justification)
            .text("code_link", &i.code_link)
    });

    let more_info = card.more_info.as_ref().map(|m| {
        let sources: Vec<Value> = m
            .sources
            .iter()
            .filter(|s| !s.is_empty())
            .map(|s| Value::String(s.clone()))
            .collect();
        let mut b = Builder::new();
        if !sources.is_empty() {
            b = b.value("sources", Value::Array(sources));
        }
        b.text("data_product_link", &m.data_product_link).text("notes", &m.notes)
    });

    Builder::new()
        .value("id", Value::String(card.id.clone()))
        .value("schema_version", Value::String(card.schema_version.clone()))
        .value("declared_tier", Value::from(card.declared_tier.level()))
        .value("data_product", data_product.build())
        .section("flavor", flavor)
        .section("privacy_loss", privacy_loss)
        .section("deployment_model", deployment_model)
        .section("accounting", accounting)
        .section("implementation", implementation)
        .section("more_info", more_info)
        .build()
}

/// Pretty-prints a JSON value with two-space indentation and a final newline.
pub fn to_canonical_text(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    text.push('\n');
    text
}

/// Canonical text of a card. Byte-deterministic for equal cards.
pub fn serialize_card(card: &DeploymentCard) -> String {
    to_canonical_text(&card_to_value(card))
}

/// A card document or a bundle of them (a JSON array, as written by export).
pub fn parse_documents(text: &str) -> Result<Vec<DeploymentCard>, ParseError> {
    let value: Value = serde_json::from_str(text).map_err(syntax_error)?;
    match &value {
        Value::Array(items) => items
            .iter()
            .enumerate()
            .map(|(i, item)| {
                card_from_value(item).map_err(|e| match e {
                    ParseError::WrongType { path, expected } if path == "$" => ParseError::WrongType {
                        path: format!("[{i}]"),
                        expected,
                    },
                    other => other,
                })
            })
            .collect(),
        _ => card_from_value(&value).map(|c| vec![c]),
    }
}

/// Canonical bundle of cards, sorted by id.
pub fn serialize_bundle<'a>(cards: impl IntoIterator<Item = &'a DeploymentCard>) -> String {
    let mut cards: Vec<_> = cards.into_iter().collect();
    cards.sort_by(|a, b| a.id.cmp(&b.id));
    to_canonical_text(&Value::Array(cards.into_iter().map(card_to_value).collect()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadError {
    pub file_path: PathBuf,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct CorpusLoadResult {
    pub cards: Vec<DeploymentCard>,
    pub load_errors: Vec<LoadError>,
}

#[derive(Debug, thiserror::Error)]
#[error("cannot read corpus directory {}: {source}", path.display())]
pub struct CorpusError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

/// `*.json` card files in `dir`, sorted by file name. The manifest is skipped.
pub fn card_files(dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let wrap = |source| CorpusError {
        path: dir.to_owned(),
        source,
    };
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(wrap)? {
        let path = entry.map_err(wrap)?.path();
        let is_json = path.extension().is_some_and(|e| e == "json");
        let is_manifest = path.file_name().is_some_and(|n| n == MANIFEST_FILE);
        if is_json && !is_manifest && path.is_file() {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

/// Loads every admissible card in `dir`.
///
/// Files are processed in file-name order; when two files share an id or a
/// normalized name, the later file is the one reported.
pub fn load_corpus(dir: &Path) -> Result<CorpusLoadResult, CorpusError> {
    let mut result = CorpusLoadResult::default();
    let mut ids: HashMap<String, PathBuf> = HashMap::new();
    let mut names: HashMap<String, String> = HashMap::new();

    for path in card_files(dir)? {
        let mut fail = |message: String| {
            result.load_errors.push(LoadError {
                file_path: path.clone(),
                message,
            })
        };
        let text = match fs::read_to_string(&path) {
            Ok(text) => text,
            Err(e) => {
                fail(format!("unreadable: {e}"));
                continue;
            }
        };
        let card = match parse_card(&text) {
            Ok(card) => card,
            Err(e) => {
                fail(e.to_string());
                continue;
            }
        };
        let report = admission_report(&card);
        if !report.passed {
            let errors: Vec<String> = report.errors().map(ToString::to_string).collect();
            fail(format!("not admissible at declared tier {}: {}", card.declared_tier, errors.join("; ")));
            continue;
        }
        if let Some(first) = ids.get(&card.id) {
            fail(format!("duplicate id `{}` (first seen in {})", card.id, first.display()));
            continue;
        }
        let expected_name = format!("{}.json", card.id);
        if path.file_name().is_some_and(|n| n != expected_name.as_str()) {
            fail(format!("file name must be {expected_name}"));
            continue;
        }
        if let Some(name) = &card.data_product.name {
            let slug = slugify(name);
            if let Some(other) = names.get(&slug) {
                fail(format!("name `{name}` duplicates the name of `{other}`"));
                continue;
            }
            names.insert(slug, card.id.clone());
        }
        ids.insert(card.id.clone(), path.clone());
        result.cards.push(card);
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::{full_card, tier1_card};

    const MINIMAL: &str = r#"{
  "id": "minimal",
  "schema_version": "1.0",
  "declared_tier": 1,
  "data_product": {
    "name": "Minimal",
    "curator": "Someone",
    "description": "Counts.",
    "intended_use": "Research.",
    "publication_year": 2020,
    "region": "Canada",
    "sector": "education"
  }
}
"#;

    #[test]
    fn minimal_document() {
        let card = parse_card(MINIMAL).unwrap();
        assert_eq!(card.id, "minimal");
        assert_eq!(card.data_product.sector, Some(Sector::Education));
        assert!(card.flavor.is_none() && card.privacy_loss.is_none() && card.more_info.is_none());
        assert_eq!(serialize_card(&card), MINIMAL);
    }

    #[test]
    fn unknown_top_level_key() {
        let doc = MINIMAL.replacen("\"id\"", "\"budget_total\": 3,\n  \"id\"", 1);
        let err = parse_card(&doc).unwrap_err();
        assert_eq!(err.kind(), "unknown-key");
        assert_eq!(err.path(), "budget_total");
    }

    #[test]
    fn unknown_nested_key() {
        let doc = MINIMAL.replacen("\"curator\"", "\"owner\": \"x\",\n    \"curator\"", 1);
        let err = parse_card(&doc).unwrap_err();
        assert_eq!(err, ParseError::UnknownKey { path: "data_product.owner".into() });
    }

    #[test]
    fn error_categories() {
        let cases = [
            ("{", "malformed-syntax", ""),
            ("[]", "wrong-type", "$"),
            (r#"{"id": 3}"#, "wrong-type", "id"),
            (r#"{"schema_version": "1.0", "declared_tier": 1}"#, "missing-key", "id"),
            (r#"{"id": "a", "schema_version": "1.0", "declared_tier": 4}"#, "enum-out-of-range", "declared_tier"),
            (
                r#"{"id": "a", "schema_version": "1.0", "declared_tier": 2, "flavor": {"name": "gaussian"}}"#,
                "enum-out-of-range",
                "flavor.name",
            ),
            (
                r#"{"id": "a", "schema_version": "1.0", "declared_tier": 2, "privacy_loss": {"parameters": [{"symbol": "epsilon", "value": "1", "scope": "total"}]}}"#,
                "wrong-type",
                "privacy_loss.parameters[0].value",
            ),
            (
                r#"{"id": "a", "schema_version": "1.0", "declared_tier": 1, "data_product": {"publication_year": 2020.5}}"#,
                "wrong-type",
                "data_product.publication_year",
            ),
            (
                r#"{"id": "a", "schema_version": "1.0", "declared_tier": 1, "more_info": {"sources": [1]}}"#,
                "wrong-type",
                "more_info.sources[0]",
            ),
        ];
        for (doc, kind, path) in cases {
            let err = parse_card(doc).unwrap_err();
            assert_eq!((err.kind(), err.path()), (kind, path), "{doc}");
        }
    }

    #[test]
    fn empty_strings_and_nulls_are_absent() {
        let doc = r#"{"id": "a", "schema_version": "1.0", "declared_tier": 1,
            "data_product": {"name": "", "region": null},
            "accounting": {"composition": ""}}"#;
        let card = parse_card(doc).unwrap();
        assert_eq!(card.data_product.name, None);
        assert_eq!(card.accounting, None);
    }

    #[test]
    fn parameter_text_survives() {
        let mut card = full_card("exact");
        card.privacy_loss.as_mut().unwrap().parameters[1].value = "0.0000000001".parse().unwrap();
        let text = serialize_card(&card);
        assert!(text.contains("\"value\": 1e-9") || text.contains("\"value\": 1.0"));
        assert!(text.contains("\"value\": 0.0000000001"));
        assert_eq!(parse_card(&text).unwrap(), card);
    }

    #[test]
    fn empty_sources_section_omitted() {
        let mut card = tier1_card("bare");
        card.more_info = Some(MoreInfoSection::default());
        let text = serialize_card(&card);
        assert!(!text.contains("more_info"));
    }

    #[test]
    fn equal_cards_serialize_identically() {
        assert_eq!(serialize_card(&full_card("a")), serialize_card(&full_card("a").clone()));
    }

    #[test]
    fn canonical_key_order() {
        let text = serialize_card(&full_card("order"));
        let order = [
            "\"id\"",
            "\"schema_version\"",
            "\"declared_tier\"",
            "\"data_product\"",
            "\"flavor\"",
            "\"privacy_loss\"",
            "\"deployment_model\"",
            "\"accounting\"",
            "\"implementation\"",
            "\"more_info\"",
        ];
        let positions: Vec<_> = order.iter().map(|k| text.find(k).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        assert!(text.ends_with("}\n"));
        assert!(text.contains("\n  \"data_product\": {\n    \"name\""));
    }

    #[test]
    fn bundle_round_trip() {
        let cards = vec![full_card("b"), tier1_card("a")];
        let text = serialize_bundle(&cards);
        let back = parse_documents(&text).unwrap();
        assert_eq!(back.iter().map(|c| c.id.as_str()).collect::<Vec<_>>(), ["a", "b"]);
        assert_eq!(serialize_bundle(&back), text);
    }

    fn write(dir: &Path, name: &str, text: &str) {
        fs::write(dir.join(name), text).unwrap();
    }

    #[test]
    fn empty_directory() {
        let dir = tempfile::tempdir().unwrap();
        let result = load_corpus(dir.path()).unwrap();
        assert!(result.cards.is_empty() && result.load_errors.is_empty());
    }

    #[test]
    fn one_bad_one_good() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "minimal.json", MINIMAL);
        write(dir.path(), "broken.json", "{ nope");
        write(dir.path(), "notes.txt", "ignored");
        let result = load_corpus(dir.path()).unwrap();
        assert_eq!(result.cards.len(), 1);
        assert_eq!(result.load_errors.len(), 1);
        assert!(result.load_errors[0].file_path.ends_with("broken.json"));
    }

    #[test]
    fn duplicates_blame_the_later_file() {
        let dir = tempfile::tempdir().unwrap();
        let mut copy = parse_card(MINIMAL).unwrap();
        copy.id = "minimal-copy".into();
        copy.data_product.name = Some("Minimal copy".into());
        let mut same_name = copy.clone();
        same_name.id = "other".into();
        same_name.data_product.name = Some("MINIMAL  copy!".into());
        write(dir.path(), "minimal.json", MINIMAL);
        write(dir.path(), "minimal-copy.json", &serialize_card(&copy));
        write(dir.path(), "wrong-name.json", MINIMAL);
        write(dir.path(), "other.json", &serialize_card(&same_name));
        let result = load_corpus(dir.path()).unwrap();
        let ids: Vec<_> = result.cards.iter().map(|c| c.id.as_str()).collect();
        assert_eq!(ids, ["minimal-copy", "minimal"]);
        let blamed: Vec<_> = result
            .load_errors
            .iter()
            .map(|e| (e.file_path.file_name().unwrap().to_str().unwrap(), e.message.as_str()))
            .collect();
        assert_eq!(blamed.len(), 2);
        assert_eq!(blamed[0].0, "other.json");
        assert!(blamed[0].1.contains("duplicates the name"));
        assert_eq!(blamed[1].0, "wrong-name.json");
        assert!(blamed[1].1.contains("duplicate id"));
    }

    #[test]
    fn inadmissible_cards_are_load_errors() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "minimal.json", &MINIMAL.replace("\"declared_tier\": 1", "\"declared_tier\": 2"));
        write(dir.path(), MANIFEST_FILE, "{}");
        let result = load_corpus(dir.path()).unwrap();
        assert!(result.cards.is_empty());
        assert_eq!(result.load_errors.len(), 1);
        assert!(result.load_errors[0].message.contains("tier-2-required"));
    }

    #[test]
    fn missing_directory() {
        assert!(load_corpus(Path::new("/definitely/not/here")).is_err());
    }
}
