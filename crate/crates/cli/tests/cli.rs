use std::path::{Path, PathBuf};

use dp_registry::io::{load_corpus, serialize_card};
use dp_registry::testing::{full_card, tier1_card};
use dp_registry::{AggregateVariable, RegistryIndex};
use dp_registry_cli::{format_stats, run, ExitStatus};
use dp_registry_service::pending::{write_pending, PendingSubmission};

fn seed_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../seed")
}

struct Output {
    status: ExitStatus,
    stdout: String,
    stderr: String,
}

fn dpreg(args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let status = run(std::iter::once("dpreg").chain(args.iter().copied()), &mut out, &mut err);
    Output {
        status,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn seed_files() -> Vec<String> {
    let mut files: Vec<String> = std::fs::read_dir(seed_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| p.to_str().unwrap().to_owned())
        .collect();
    files.sort();
    files
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_str().unwrap().to_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn stats_by_tier_on_seed() {
    let o = dpreg(&["stats", "--corpus", path(&seed_dir()), "--by", "tier"]);
    assert_eq!(o.status, ExitStatus::Success, "{}", o.stderr);
    assert_eq!(o.stdout, "tier   count\n3         10\n2          8\n1          3\ntotal     21\n");
}

#[test]
fn stats_equal_index_aggregates_for_every_variable() {
    let index = RegistryIndex::new(load_corpus(&seed_dir()).unwrap().cards);
    for variable in AggregateVariable::ALL {
        let o = dpreg(&["stats", "--corpus", path(&seed_dir()), "--by", variable.as_str(), "--year-from", "2017"]);
        assert_eq!(o.status, ExitStatus::Success);
        let expected = index.aggregate(variable, Some(dp_registry::YearRange { min: Some(2017), max: None }));
        assert_eq!(o.stdout, format_stats(&expected));
        let rows: Vec<(String, usize)> = o
            .stdout
            .lines()
            .skip(1)
            .filter(|l| !l.starts_with("total"))
            .map(|l| {
                let (key, count) = l.rsplit_once(' ').unwrap();
                (key.trim_end().to_owned(), count.parse().unwrap())
            })
            .collect();
        let buckets: Vec<(String, usize)> = expected.buckets.iter().map(|b| (b.key.clone(), b.count)).collect();
        assert_eq!(rows, buckets, "{variable}");
    }
}

#[test]
fn stats_rejects_unknown_variable() {
    let o = dpreg(&["stats", "--corpus", path(&seed_dir()), "--by", "colour"]);
    assert_eq!(o.status, ExitStatus::Usage);
    assert!(o.stderr.contains("deployment_model"));
}

#[test]
fn tier_command() {
    let o = dpreg(&["tier", path(&seed_dir().join("us-census-2020-redistricting.json"))]);
    assert_eq!((o.status, o.stdout.as_str()), (ExitStatus::Success, "3\n"));
    let o = dpreg(&["tier", path(&seed_dir().join("microsoft-us-broadband.json"))]);
    assert_eq!(o.stdout, "1\n");

    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{}");
    let o = dpreg(&["tier", path(&bad)]);
    assert_eq!((o.status, o.stdout.as_str()), (ExitStatus::Failure, "invalid\n"));
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let tier1 = write(dir.path(), "t1.json", &serialize_card(&tier1_card("t1")));
    let full = write(dir.path(), "full.json", &serialize_card(&full_card("full")));
    let broken = write(dir.path(), "broken.json", "{\"id\": ");

    assert_eq!(dpreg(&["validate", path(&tier1), path(&full)]).status, ExitStatus::Success);

    let o = dpreg(&["validate", "--tier", "3", path(&tier1)]);
    assert_eq!(o.status, ExitStatus::Failure);
    assert!(o.stdout.contains("tier-3-required"));

    let o = dpreg(&["validate", path(&broken)]);
    assert_eq!(o.status, ExitStatus::Failure);
    assert!(o.stdout.contains("malformed-syntax"));

    let missing = dir.path().join("missing.json");
    assert_eq!(dpreg(&["validate", path(&missing)]).status, ExitStatus::Usage);
    assert_eq!(dpreg(&["validate", path(&tier1), path(&missing)]).status, ExitStatus::Usage);
    assert_eq!(dpreg(&["validate", "--tier", "4", path(&tier1)]).status, ExitStatus::Usage);
    assert_eq!(dpreg(&["validate"]).status, ExitStatus::Usage);
    assert_eq!(dpreg(&["frobnicate"]).status, ExitStatus::Usage);

    let o = dpreg(&["validate", "--bogus", path(&tier1)]);
    assert_eq!(o.status, ExitStatus::Usage);
    assert!(o.stderr.contains("Usage"));
    assert_eq!(dpreg(&["--help"]).status, ExitStatus::Success);
}

#[test]
fn validate_flags_understated_tier_without_failing() {
    let dir = tempfile::tempdir().unwrap();
    let mut card = full_card("modest");
    card.declared_tier = dp_registry::TransparencyTier::ONE;
    let file = write(dir.path(), "modest.json", &serialize_card(&card));
    let o = dpreg(&["validate", path(&file)]);
    assert_eq!(o.status, ExitStatus::Success);
    assert!(o.stdout.contains("understated-tier"));
}

#[test]
fn import_export_import_is_idempotent() {
    let work = tempfile::tempdir().unwrap();
    let a = work.path().join("a");
    let b = work.path().join("b");

    let mut args = vec!["import", "--corpus", path(&a)];
    let files = seed_files();
    args.extend(files.iter().map(String::as_str));
    let o = dpreg(&args);
    assert_eq!(o.status, ExitStatus::Success, "{}{}", o.stdout, o.stderr);

    let bundle_a = work.path().join("a.json");
    assert_eq!(dpreg(&["export", "--corpus", path(&a), "--out", path(&bundle_a)]).status, ExitStatus::Success);
    assert_eq!(dpreg(&["import", "--corpus", path(&b), path(&bundle_a)]).status, ExitStatus::Success);
    let bundle_b = work.path().join("b.json");
    assert_eq!(dpreg(&["export", "--corpus", path(&b), "--out", path(&bundle_b)]).status, ExitStatus::Success);

    assert_eq!(std::fs::read(&bundle_a).unwrap(), std::fs::read(&bundle_b).unwrap());
    assert_eq!(snapshot(&a), snapshot(&b));

    let before = snapshot(&a);
    assert_eq!(dpreg(&["import", "--corpus", path(&a), path(&bundle_a)]).status, ExitStatus::Success);
    assert_eq!(snapshot(&a), before);

    let seed: Vec<_> = snapshot(&seed_dir()).into_iter().filter(|(n, _)| n != "manifest.json").collect();
    assert_eq!(snapshot(&a), seed);
}

#[test]
fn import_is_all_or_nothing() {
    let work = tempfile::tempdir().unwrap();
    let corpus = work.path().join("corpus");
    let good = write(work.path(), "good.json", &serialize_card(&tier1_card("good")));
    let mut lying = tier1_card("lying");
    lying.declared_tier = dp_registry::TransparencyTier::THREE;
    let lying = write(work.path(), "lying.json", &serialize_card(&lying));

    let o = dpreg(&["import", "--corpus", path(&corpus), path(&good), path(&lying)]);
    assert_eq!(o.status, ExitStatus::Failure);
    assert!(o.stderr.contains("nothing imported"));
    assert!(!corpus.join("good.json").exists());

    let mut twin = tier1_card("twin");
    twin.data_product.name = Some("Deployment good".into());
    let twin = write(work.path(), "twin.json", &serialize_card(&twin));
    let o = dpreg(&["import", "--corpus", path(&corpus), path(&good), path(&twin)]);
    assert_eq!(o.status, ExitStatus::Failure);
}

#[test]
fn promote_moves_pending_card_into_corpus() {
    let work = tempfile::tempdir().unwrap();
    let corpus = work.path().join("corpus");
    let pending = work.path().join("pending");
    std::fs::create_dir_all(&corpus).unwrap();
    let card = tier1_card("queued");
    write_pending(&pending, &PendingSubmission::new(&card, chrono::Utc::now())).unwrap();

    let o = dpreg(&["promote", "--corpus", path(&corpus), "--pending", path(&pending), "queued"]);
    assert_eq!(o.status, ExitStatus::Success, "{}", o.stderr);
    assert_eq!(std::fs::read_to_string(corpus.join("queued.json")).unwrap(), serialize_card(&card));

    let o = dpreg(&["promote", "--corpus", path(&corpus), "--pending", path(&pending), "queued"]);
    assert_eq!(o.status, ExitStatus::Usage);
}
