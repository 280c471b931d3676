//! Shared server state and the swappable corpus snapshot.

use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};
use std::time::SystemTime;

use dp_registry::io::{card_files, load_corpus, CorpusError, LoadError};
use dp_registry::RegistryIndex;

use crate::guide::GuideSection;
use crate::rate_limit::RateLimiter;

/// Submissions allowed per peer per minute.
pub const SUBMISSIONS_PER_MINUTE: usize = 10;

#[derive(Debug, Default)]
pub struct Snapshot {
    pub index: RegistryIndex,
    pub load_errors: Vec<LoadError>,
}

/// Names, sizes and modification times of the corpus files.
pub type Fingerprint = Vec<(PathBuf, u64, Option<SystemTime>)>;

pub fn corpus_fingerprint(dir: &Path) -> Result<Fingerprint, CorpusError> {
    Ok(card_files(dir)?
        .into_iter()
        .map(|path| {
            let meta = std::fs::metadata(&path).ok();
            let len = meta.as_ref().map_or(0, |m| m.len());
            let modified = meta.and_then(|m| m.modified().ok());
            (path, len, modified)
        })
        .collect())
}

#[derive(Debug)]
pub struct AppState {
    pub corpus_dir: PathBuf,
    pub pending_dir: PathBuf,
    pub guide: Vec<GuideSection>,
    pub limiter: RateLimiter,
    snapshot: RwLock<Arc<Snapshot>>,
    /// Serializes conflict checks and writes to the pending directory.
    pub(crate) pending_writer: tokio::sync::Mutex<()>,
}

impl AppState {
    /// Loads the corpus. Unreadable cards are kept as load errors, not fatal.
    pub fn load(corpus_dir: PathBuf, pending_dir: PathBuf, guide: Vec<GuideSection>) -> Result<Self, CorpusError> {
        let state = AppState {
            corpus_dir,
            pending_dir,
            guide,
            limiter: RateLimiter::per_minute(SUBMISSIONS_PER_MINUTE),
            snapshot: RwLock::new(Arc::default()),
            pending_writer: tokio::sync::Mutex::new(()),
        };
        state.reload()?;
        Ok(state)
    }

    /// The current snapshot. Hold on to it for the whole request.
    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn replace_snapshot(&self, snapshot: Snapshot) {
        *self.snapshot.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(snapshot);
    }

    /// Rebuilds the index from disk and swaps it in.
    pub fn reload(&self) -> Result<(), CorpusError> {
        let loaded = load_corpus(&self.corpus_dir)?;
        for error in &loaded.load_errors {
            tracing::warn!(file = %error.file_path.display(), "{}", error.message);
        }
        tracing::info!(cards = loaded.cards.len(), "corpus loaded");
        self.replace_snapshot(Snapshot {
            index: RegistryIndex::new(loaded.cards),
            load_errors: loaded.load_errors,
        });
        Ok(())
    }
}
