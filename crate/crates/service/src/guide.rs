//! Explanatory text for each table column.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuideSection {
    pub section_id: String,
    pub title: String,
    pub body: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct IndexEntry {
    section_id: String,
    title: String,
    file: String,
}

#[derive(Debug, thiserror::Error)]
pub enum GuideError {
    #[error("cannot read guide file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid guide index: {0}")]
    Index(#[from] serde_json::Error),
    #[error("guide index lists `{0}`, which is not shipped")]
    MissingFile(String),
    #[error("guide section `{0}` appears twice")]
    DuplicateSection(String),
    #[error("guide section `{0}` has an empty body")]
    EmptySection(String),
    #[error("guide has no sections")]
    Empty,
}

pub const INDEX_FILE: &str = "index.json";

macro_rules! shipped {
    ($($file:literal),* $(,)?) => {
        &[$(($file, include_str!(concat!("../../../guide/", $file)))),*]
    };
}

static SHIPPED_INDEX: &str = include_str!("../../../guide/index.json");
static SHIPPED_FILES: &[(&str, &str)] = shipped![
    "name.md",
    "curator.md",
    "description.md",
    "publication-year.md",
    "tier.md",
    "flavor.md",
    "privacy-loss.md",
    "deployment-model.md",
    "release-type.md",
    "data-source.md",
    "access-type.md",
    "accounting.md",
    "implementation.md",
    "more-info.md",
];

fn assemble(index: &str, mut read: impl FnMut(&str) -> Result<String, GuideError>) -> Result<Vec<GuideSection>, GuideError> {
    let entries: Vec<IndexEntry> = serde_json::from_str(index)?;
    if entries.is_empty() {
        return Err(GuideError::Empty);
    }
    let mut seen = HashSet::new();
    let mut sections = Vec::with_capacity(entries.len());
    for entry in entries {
        if !seen.insert(entry.section_id.clone()) {
            return Err(GuideError::DuplicateSection(entry.section_id));
        }
        let body = read(&entry.file)?.trim().to_owned();
        if body.is_empty() {
            return Err(GuideError::EmptySection(entry.section_id));
        }
        sections.push(GuideSection {
            section_id: entry.section_id,
            title: entry.title,
            body,
        });
    }
    Ok(sections)
}

/// The guide compiled into the binary.
pub fn shipped() -> Result<Vec<GuideSection>, GuideError> {
    assemble(SHIPPED_INDEX, |file| {
        SHIPPED_FILES
            .iter()
            .find(|(name, _)| *name == file)
            .map(|(_, text)| (*text).to_owned())
            .ok_or_else(|| GuideError::MissingFile(file.to_owned()))
    })
}

/// A guide read from `dir/index.json` and the files it lists.
pub fn load_dir(dir: &Path) -> Result<Vec<GuideSection>, GuideError> {
    let read = |path: &Path| {
        std::fs::read_to_string(path).map_err(|source| GuideError::Io {
            path: path.display().to_string(),
            source,
        })
    };
    let index = read(&dir.join(INDEX_FILE))?;
    assemble(&index, |file| read(&dir.join(file)))
}
