//! The moderation queue: submitted cards wait here until an operator
//! promotes them into the corpus.

use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use dp_registry::card::slugify;
use dp_registry::io::{card_from_value, card_to_value, load_corpus, serialize_card, to_canonical_text, CorpusError};
use dp_registry::validate::admission_report;
use dp_registry::DeploymentCard;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubmissionStatus {
    Pending,
}

/// On-disk form of a queued submission. The submission id is the card id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendingSubmission {
    pub submission_id: String,
    pub submitted_at: DateTime<Utc>,
    pub status: SubmissionStatus,
    pub card: Value,
}

impl PendingSubmission {
    pub fn new(card: &DeploymentCard, submitted_at: DateTime<Utc>) -> Self {
        PendingSubmission {
            submission_id: card.id.clone(),
            submitted_at,
            status: SubmissionStatus::Pending,
            card: card_to_value(card),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PendingError {
    #[error("no pending submission `{0}`")]
    NotFound(String),
    #[error("pending submission `{id}` is invalid: {reason}")]
    Invalid { id: String, reason: String },
    #[error("{0}")]
    Conflict(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> PendingError + '_ {
    move |source| PendingError::Io {
        path: path.to_owned(),
        source,
    }
}

pub fn pending_path(pending_dir: &Path, id: &str) -> PathBuf {
    pending_dir.join(format!("{id}.json"))
}

/// Writes `text` next to `path` and renames it into place.
pub fn write_atomically(path: &Path, text: &str) -> Result<(), PendingError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io_error(dir))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("card");
    let tmp = dir.join(format!(".{name}.tmp"));
    std::fs::write(&tmp, text).map_err(io_error(&tmp))?;
    std::fs::rename(&tmp, path).map_err(io_error(path))
}

pub fn write_pending(pending_dir: &Path, submission: &PendingSubmission) -> Result<PathBuf, PendingError> {
    let path = pending_path(pending_dir, &submission.submission_id);
    let value = serde_json::to_value(submission).expect("submissions always serialize");
    write_atomically(&path, &to_canonical_text(&value))?;
    Ok(path)
}

pub fn read_pending(pending_dir: &Path, id: &str) -> Result<(PendingSubmission, DeploymentCard), PendingError> {
    let path = pending_path(pending_dir, id);
    let text = match std::fs::read_to_string(&path) {
        Ok(text) => text,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(PendingError::NotFound(id.to_owned())),
        Err(e) => return Err(io_error(&path)(e)),
    };
    let invalid = |reason: String| PendingError::Invalid {
        id: id.to_owned(),
        reason,
    };
    let submission: PendingSubmission = serde_json::from_str(&text).map_err(|e| invalid(e.to_string()))?;
    let card = card_from_value(&submission.card).map_err(|e| invalid(e.to_string()))?;
    if card.id != id || submission.submission_id != id {
        return Err(invalid(format!("file holds card `{}`", card.id)));
    }
    Ok((submission, card))
}

/// Ids of queued submissions, sorted.
pub fn pending_ids(pending_dir: &Path) -> Result<Vec<String>, PendingError> {
    let entries = match std::fs::read_dir(pending_dir) {
        Ok(entries) => entries,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io_error(pending_dir)(e)),
    };
    let mut ids = Vec::new();
    for entry in entries {
        let path = entry.map_err(io_error(pending_dir))?.path();
        if path.extension().is_some_and(|e| e == "json") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                if !stem.starts_with('.') {
                    ids.push(stem.to_owned());
                }
            }
        }
    }
    ids.sort();
    Ok(ids)
}

/// Why `card` may not join a corpus holding `existing`, if it may not.
pub fn conflict_with<'a>(card: &DeploymentCard, existing: impl IntoIterator<Item = &'a DeploymentCard>) -> Option<String> {
    let name = slugify(card.data_product.name.as_deref().unwrap_or_default());
    for other in existing {
        if other.id == card.id {
            return Some(format!("a card with id `{}` already exists", card.id));
        }
        if !name.is_empty() && slugify(other.data_product.name.as_deref().unwrap_or_default()) == name {
            return Some(format!("card `{}` already uses the name of `{}`", other.id, card.id));
        }
    }
    None
}

/// Moves a pending card into the corpus as a canonical file.
pub fn promote(corpus_dir: &Path, pending_dir: &Path, id: &str) -> Result<DeploymentCard, PendingError> {
    let (_, card) = read_pending(pending_dir, id)?;
    let report = admission_report(&card);
    if !report.passed {
        let reasons: Vec<String> = report.errors().map(ToString::to_string).collect();
        return Err(PendingError::Invalid {
            id: id.to_owned(),
            reason: reasons.join("; "),
        });
    }
    let corpus = load_corpus(corpus_dir)?;
    let target = corpus_dir.join(format!("{id}.json"));
    if target.exists() {
        return Err(PendingError::Conflict(format!("{} already exists", target.display())));
    }
    if let Some(reason) = conflict_with(&card, &corpus.cards) {
        return Err(PendingError::Conflict(reason));
    }
    write_atomically(&target, &serialize_card(&card))?;
    let source = pending_path(pending_dir, id);
    std::fs::remove_file(&source).map_err(io_error(&source))?;
    Ok(card)
}
