//! The `dpreg` command-line tool.
//!
//! [`run`] takes the argument list and output streams, so every subcommand
//! can be driven from tests without spawning a process.

use std::collections::{HashMap, HashSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use dp_registry::card::slugify;
use dp_registry::io::{load_corpus, parse_documents, serialize_bundle, serialize_card, CorpusLoadResult};
use dp_registry::validate::{admission_report, infer_tier, validate_at_tier};
use dp_registry::{AggregateResult, AggregateVariable, DeploymentCard, RegistryIndex, TransparencyTier, YearRange};
use dp_registry_service::pending::{self, write_atomically, PendingError};
use dp_registry_service::ServiceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExitStatus {
    Success = 0,
    /// A card failed validation, or a corpus operation was refused.
    Failure = 1,
    /// Bad arguments or an I/O problem.
    Usage = 2,
}

impl ExitStatus {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Parser)]
#[command(name = "dpreg", version, about = "Validate, manage and serve a registry of differential-privacy deployments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check card files against their declared tier (or --tier).
    Validate {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        tier: Option<u8>,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Print the inferred tier of a card, or `invalid`.
    Tier { file: PathBuf },
    /// Validate cards and write them into a corpus in canonical form.
    Import {
        #[arg(long, env = "REGISTRY_CORPUS_DIR")]
        corpus: PathBuf,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Write every corpus card to one JSON array, ordered by id.
    Export {
        #[arg(long, env = "REGISTRY_CORPUS_DIR")]
        corpus: PathBuf,
        /// Output file, or `-` for standard output.
        #[arg(long)]
        out: PathBuf,
    },
    /// Count corpus cards per level of a variable.
    Stats {
        #[arg(long, env = "REGISTRY_CORPUS_DIR")]
        corpus: PathBuf,
        /// One of: tier, flavor, deployment_model, region, sector, release_type, data_source, access_type.
        #[arg(long)]
        by: String,
        #[arg(long)]
        year_from: Option<i32>,
        #[arg(long)]
        year_to: Option<i32>,
    },
    /// Move a pending submission into the corpus.
    Promote {
        #[arg(long, env = "REGISTRY_CORPUS_DIR")]
        corpus: PathBuf,
        #[arg(long, env = "REGISTRY_PENDING_DIR")]
        pending: PathBuf,
        submission_id: String,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long, env = "REGISTRY_CORPUS_DIR")]
        corpus: PathBuf,
        #[arg(long, env = "REGISTRY_PENDING_DIR", default_value = "pending")]
        pending: PathBuf,
        #[arg(long, env = "REGISTRY_PORT", default_value_t = dp_registry_service::DEFAULT_PORT)]
        port: u16,
        #[arg(long, env = "REGISTRY_CORS_ORIGIN")]
        cors_origin: Option<String>,
        /// Serve guide text from this directory instead of the built-in copy.
        #[arg(long, env = "REGISTRY_GUIDE_DIR")]
        guide_dir: Option<PathBuf>,
    },
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

// Output is best effort: a closed pipe must not turn into a panic.
macro_rules! say {
    ($io:expr, $($arg:tt)*) => { let _ = writeln!($io.out, $($arg)*); };
}
macro_rules! complain {
    ($io:expr, $($arg:tt)*) => { let _ = writeln!($io.err, $($arg)*); };
}

/// Runs one command line. `args` includes the program name.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let mut io = Io { out, err };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(io.out, "{text}");
                ExitStatus::Success
            } else {
                let _ = write!(io.err, "{text}");
                ExitStatus::Usage
            };
        }
    };
    match cli.command {
        Command::Validate { tier, files } => validate(&mut io, tier.and_then(TransparencyTier::new), &files),
        Command::Tier { file } => tier(&mut io, &file),
        Command::Import { corpus, files } => import(&mut io, &corpus, &files),
        Command::Export { corpus, out } => export(&mut io, &corpus, &out),
        Command::Stats {
            corpus,
            by,
            year_from,
            year_to,
        } => stats(&mut io, &corpus, &by, year_from, year_to),
        Command::Promote {
            corpus,
            pending,
            submission_id,
        } => promote(&mut io, &corpus, &pending, &submission_id),
        Command::Serve {
            corpus,
            pending,
            port,
            cors_origin,
            guide_dir,
        } => {
            let mut config = ServiceConfig::new(corpus, pending);
            config.port = port;
            config.cors_origin = cors_origin;
            config.guide_dir = guide_dir;
            serve(&mut io, &config)
        }
    }
}

/// Cards in one file, which may hold a single card or an array of cards.
fn read_cards(io: &mut Io, path: &Path) -> Result<Vec<DeploymentCard>, ExitStatus> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        complain!(io, "{}: cannot read: {e}", path.display());
        ExitStatus::Usage
    })?;
    parse_documents(&text).map_err(|e| {
        say!(io, "FAIL {}", path.display());
        say!(io, "  error [{}] {}: {e}", e.kind(), e.path());
        ExitStatus::Failure
    })
}

fn validate(io: &mut Io, tier: Option<TransparencyTier>, files: &[PathBuf]) -> ExitStatus {
    let mut status = ExitStatus::Success;
    for path in files {
        let cards = match read_cards(io, path) {
            Ok(cards) => cards,
            Err(s) => {
                status = status.max(s);
                continue;
            }
        };
        for card in cards {
            let target = tier.unwrap_or(card.declared_tier);
            let report = match tier {
                Some(t) => validate_at_tier(&card, t),
                None => admission_report(&card),
            };
            let verdict = if report.passed { "PASS" } else { "FAIL" };
            say!(io, "{verdict} {} ({}) at tier {target}", path.display(), card.id);
            for issue in &report.issues {
                say!(io, "  {issue}");
            }
            if !report.passed {
                status = status.max(ExitStatus::Failure);
            }
        }
    }
    status
}

fn tier(io: &mut Io, path: &Path) -> ExitStatus {
    let text = match std::fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) => {
            complain!(io, "{}: cannot read: {e}", path.display());
            return ExitStatus::Usage;
        }
    };
    match dp_registry::parse_card(&text).ok().as_ref().and_then(infer_tier) {
        Some(t) => {
            say!(io, "{t}");
            ExitStatus::Success
        }
        None => {
            say!(io, "invalid");
            ExitStatus::Failure
        }
    }
}

fn load(io: &mut Io, corpus: &Path) -> Result<CorpusLoadResult, ExitStatus> {
    let loaded = load_corpus(corpus).map_err(|e| {
        complain!(io, "{e}");
        ExitStatus::Usage
    })?;
    for error in &loaded.load_errors {
        complain!(io, "warning: {}: {}", error.file_path.display(), error.message);
    }
    Ok(loaded)
}

fn import(io: &mut Io, corpus: &Path, files: &[PathBuf]) -> ExitStatus {
    let mut batch = Vec::new();
    let mut status = ExitStatus::Success;
    for path in files {
        match read_cards(io, path) {
            Ok(cards) => batch.extend(cards.into_iter().map(|c| (path.clone(), c))),
            Err(s) => status = status.max(s),
        }
    }
    if status != ExitStatus::Success {
        complain!(io, "nothing imported");
        return status;
    }

    if let Err(e) = std::fs::create_dir_all(corpus) {
        complain!(io, "{}: {e}", corpus.display());
        return ExitStatus::Usage;
    }
    let existing = match load(io, corpus) {
        Ok(loaded) => loaded.cards,
        Err(s) => return s,
    };
    let replaced: HashSet<&str> = batch.iter().map(|(_, c)| c.id.as_str()).collect();
    let mut names: HashMap<String, String> = existing
        .iter()
        .filter(|c| !replaced.contains(c.id.as_str()))
        .map(|c| (slugify(c.data_product.name.as_deref().unwrap_or_default()), c.id.clone()))
        .collect();
    let mut ids = HashSet::new();
    for (path, card) in &batch {
        let report = admission_report(card);
        if !report.passed {
            say!(io, "FAIL {} ({})", path.display(), card.id);
            for issue in report.errors() {
                say!(io, "  {issue}");
            }
            status = ExitStatus::Failure;
        }
        if !ids.insert(card.id.as_str()) {
            say!(io, "FAIL {}: id `{}` appears twice in this import", path.display(), card.id);
            status = ExitStatus::Failure;
        }
        let name = slugify(card.data_product.name.as_deref().unwrap_or_default());
        if let Some(other) = names.insert(name, card.id.clone()).filter(|other| *other != card.id) {
            say!(io, "FAIL {} ({}): same name as `{other}`", path.display(), card.id);
            status = ExitStatus::Failure;
        }
    }
    if status != ExitStatus::Success {
        complain!(io, "nothing imported");
        return status;
    }

    for (_, card) in &batch {
        let target = corpus.join(format!("{}.json", card.id));
        if let Err(e) = write_atomically(&target, &serialize_card(card)) {
            complain!(io, "{e}");
            return ExitStatus::Usage;
        }
    }
    say!(io, "imported {} card(s) into {}", batch.len(), corpus.display());
    ExitStatus::Success
}

fn export(io: &mut Io, corpus: &Path, out: &Path) -> ExitStatus {
    let loaded = match load(io, corpus) {
        Ok(loaded) => loaded,
        Err(s) => return s,
    };
    if !loaded.load_errors.is_empty() {
        complain!(io, "refusing to export a corpus with load errors");
        return ExitStatus::Failure;
    }
    let bundle = serialize_bundle(&loaded.cards);
    if out == Path::new("-") {
        let _ = io.out.write_all(bundle.as_bytes());
        return ExitStatus::Success;
    }
    match std::fs::write(out, bundle) {
        Ok(()) => {
            complain!(io, "exported {} card(s) to {}", loaded.cards.len(), out.display());
            ExitStatus::Success
        }
        Err(e) => {
            complain!(io, "{}: {e}", out.display());
            ExitStatus::Usage
        }
    }
}

/// Two aligned columns: bucket key and count, then a total row.
pub fn format_stats(result: &AggregateResult) -> String {
    let label = result.variable.as_str();
    let key_width = result
        .buckets
        .iter()
        .map(|b| b.key.chars().count())
        .chain([label.len(), "total".len()])
        .max()
        .unwrap_or(0);
    let count_width = result.total().to_string().len().max("count".len());
    let mut text = format!("{label:<key_width$}  {:>count_width$}\n", "count");
    for bucket in &result.buckets {
        let pad = key_width - bucket.key.chars().count();
        text.push_str(&format!("{}{}  {:>count_width$}\n", bucket.key, " ".repeat(pad), bucket.count));
    }
    text.push_str(&format!("{:<key_width$}  {:>count_width$}\n", "total", result.total()));
    text
}

fn stats(io: &mut Io, corpus: &Path, by: &str, year_from: Option<i32>, year_to: Option<i32>) -> ExitStatus {
    let variable: AggregateVariable = match by.parse() {
        Ok(v) => v,
        Err(e) => {
            let known: Vec<&str> = AggregateVariable::ALL.iter().map(|v| v.as_str()).collect();
            complain!(io, "{e}; expected one of: {}", known.join(", "));
            return ExitStatus::Usage;
        }
    };
    let loaded = match load(io, corpus) {
        Ok(loaded) => loaded,
        Err(s) => return s,
    };
    let range = (year_from.is_some() || year_to.is_some()).then_some(YearRange {
        min: year_from,
        max: year_to,
    });
    let result = RegistryIndex::new(loaded.cards).aggregate(variable, range);
    let _ = io.out.write_all(format_stats(&result).as_bytes());
    ExitStatus::Success
}

fn promote(io: &mut Io, corpus: &Path, pending_dir: &Path, id: &str) -> ExitStatus {
    match pending::promote(corpus, pending_dir, id) {
        Ok(card) => {
            say!(io, "promoted {} into {}", card.id, corpus.display());
            ExitStatus::Success
        }
        Err(e) => {
            complain!(io, "{e}");
            match e {
                PendingError::Invalid { .. } | PendingError::Conflict(_) => ExitStatus::Failure,
                PendingError::NotFound(_) | PendingError::Io { .. } | PendingError::Corpus(_) => ExitStatus::Usage,
            }
        }
    }
}

fn serve(io: &mut Io, config: &ServiceConfig) -> ExitStatus {
    let runtime = match tokio::runtime::Builder::new_multi_thread().enable_all().build() {
        Ok(rt) => rt,
        Err(e) => {
            complain!(io, "cannot start runtime: {e}");
            return ExitStatus::Usage;
        }
    };
    match runtime.block_on(dp_registry_service::serve(config)) {
        Ok(()) => ExitStatus::Success,
        Err(e) => {
            complain!(io, "{e}");
            ExitStatus::Usage
        }
    }
}
