//! Input datasets: loading, validation, DOI normalization and the DOI block
//! index.
//!
//! Five flat files feed the pipeline. Delimited files carry a fixed header
//! that must match exactly; works are line-delimited JSON. Rows that fail
//! validation are skipped and tallied by reason. A file is rejected outright
//! when more than 10% of its rows are malformed. Duplicate ids keep the
//! first occurrence.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, InvalidDoi, Result};

/// Shared, cheaply clonable identifier text.
pub type Id = Arc<str>;

pub const AUTHORS_HEADER: [&str; 4] = ["author_id", "display_name", "orcid", "country"];
pub const EVENTS_HEADER: [&str; 3] = ["tweet_id", "tweeter_id", "doi"];
pub const TWEETERS_HEADER: [&str; 3] = ["tweeter_id", "handle", "profile_name"];
pub const GOLDEN_HEADER: [&str; 2] = ["author_id", "tweeter_id"];

/// Fraction of malformed rows above which a file is rejected.
pub const MALFORMED_LIMIT: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorRecord {
    pub author_id: Id,
    pub display_name: String,
    pub orcid: Option<String>,
    /// ISO-3166 alpha-2 code of the last known affiliation, uppercase.
    pub country: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptScore {
    pub name: String,
    pub level: u32,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkRecord {
    pub work_id: Id,
    pub doi: Id,
    pub author_ids: Vec<Id>,
    #[serde(default)]
    pub concepts: Vec<ConceptScore>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetEvent {
    pub tweet_id: Id,
    pub tweeter_id: Id,
    pub doi: Id,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweeterProfile {
    pub tweeter_id: Id,
    pub handle: String,
    pub profile_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GoldenPair {
    pub author_id: Id,
    pub tweeter_id: Id,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub authors: Vec<AuthorRecord>,
    pub works: Vec<WorkRecord>,
    pub events: Vec<TweetEvent>,
    pub tweeters: Vec<TweeterProfile>,
    pub golden: Vec<GoldenPair>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusPaths {
    pub authors: PathBuf,
    pub works: PathBuf,
    pub events: PathBuf,
    pub tweeters: PathBuf,
    /// Only needed for evaluation.
    pub golden: Option<PathBuf>,
}

impl CorpusPaths {
    /// Conventional file names inside one directory.
    pub fn in_dir(dir: &Path) -> Self {
        CorpusPaths {
            authors: dir.join("authors.csv"),
            works: dir.join("works.jsonl"),
            events: dir.join("events.csv"),
            tweeters: dir.join("tweeters.csv"),
            golden: Some(dir.join("golden.csv")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    WrongFieldCount,
    Unreadable,
    MissingField,
    InvalidDoi,
    InvalidCountry,
    InvalidConcept,
    NoAuthors,
    DuplicateId,
    DuplicatePair,
}

impl SkipReason {
    /// Duplicates are well-formed rows and do not count toward the
    /// malformed limit.
    pub fn is_malformed(self) -> bool {
        !matches!(self, SkipReason::DuplicateId | SkipReason::DuplicatePair)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SkipReason::WrongFieldCount => "wrong_field_count",
            SkipReason::Unreadable => "unreadable",
            SkipReason::MissingField => "missing_field",
            SkipReason::InvalidDoi => "invalid_doi",
            SkipReason::InvalidCountry => "invalid_country",
            SkipReason::InvalidConcept => "invalid_concept",
            SkipReason::NoAuthors => "no_authors",
            SkipReason::DuplicateId => "duplicate_id",
            SkipReason::DuplicatePair => "duplicate_pair",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileReport {
    pub dataset: &'static str,
    pub path: PathBuf,
    pub rows_read: usize,
    pub rows_loaded: usize,
    pub skipped: BTreeMap<SkipReason, usize>,
}

impl FileReport {
    fn new(dataset: &'static str, path: &Path) -> Self {
        FileReport {
            dataset,
            path: path.to_path_buf(),
            rows_read: 0,
            rows_loaded: 0,
            skipped: BTreeMap::new(),
        }
    }

    fn skip(&mut self, reason: SkipReason) {
        *self.skipped.entry(reason).or_default() += 1;
    }

    pub fn skipped_total(&self) -> usize {
        self.skipped.values().sum()
    }

    pub fn malformed(&self) -> usize {
        self.skipped
            .iter()
            .filter(|(reason, _)| reason.is_malformed())
            .map(|(_, n)| n)
            .sum()
    }

    fn check_malformed_limit(&self) -> Result<()> {
        let malformed = self.malformed();
        if self.rows_read > 0 && malformed as f64 > MALFORMED_LIMIT * self.rows_read as f64 {
            return Err(Error::ExcessiveMalformedRows {
                path: self.path.clone(),
                malformed,
                total: self.rows_read,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub files: Vec<FileReport>,
}

impl LoadReport {
    pub fn file(&self, dataset: &str) -> Option<&FileReport> {
        self.files.iter().find(|f| f.dataset == dataset)
    }
}

impl fmt::Display for LoadReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<10} {:>10} {:>10} {:>8}  skipped by reason",
            "dataset", "read", "loaded", "skipped"
        )?;
        for file in &self.files {
            let reasons = file
                .skipped
                .iter()
                .map(|(reason, n)| format!("{}={}", reason.as_str(), n))
                .collect::<Vec<_>>()
                .join(" ");
            writeln!(
                f,
                "{:<10} {:>10} {:>10} {:>8}  {}",
                file.dataset,
                file.rows_read,
                file.rows_loaded,
                file.skipped_total(),
                reasons
            )?;
        }
        Ok(())
    }
}

const DOI_PREFIXES: [&str; 5] = [
    "https://doi.org/",
    "http://doi.org/",
    "https://dx.doi.org/",
    "http://dx.doi.org/",
    "doi:",
];

/// Lowercase, trim and strip resolver prefixes from a DOI.
pub fn normalize_doi(raw: &str) -> Result<String, InvalidDoi> {
    let lowered = raw.trim().to_lowercase();
    let mut doi = lowered.as_str();
    for prefix in DOI_PREFIXES {
        if let Some(rest) = doi.strip_prefix(prefix) {
            doi = rest.trim();
            break;
        }
    }
    if doi.starts_with("10.") {
        Ok(doi.to_string())
    } else {
        Err(InvalidDoi(raw.to_string()))
    }
}

/// Blocking index: which authors wrote, and which tweeters tweeted, each DOI.
///
/// Id lists are sorted and free of duplicates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DoiIndex {
    pub authors_by_doi: HashMap<Id, Vec<Id>>,
    pub tweeters_by_doi: HashMap<Id, Vec<Id>>,
}

impl DoiIndex {
    pub fn authors_of(&self, doi: &str) -> &[Id] {
        self.authors_by_doi
            .get(doi)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn tweeters_of(&self, doi: &str) -> &[Id] {
        self.tweeters_by_doi
            .get(doi)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}

pub fn build_doi_index(works: &[WorkRecord], events: &[TweetEvent]) -> DoiIndex {
    let mut authors_by_doi: HashMap<Id, Vec<Id>> = HashMap::new();
    for work in works {
        authors_by_doi
            .entry(work.doi.clone())
            .or_default()
            .extend(work.author_ids.iter().cloned());
    }
    let mut tweeters_by_doi: HashMap<Id, Vec<Id>> = HashMap::new();
    for event in events {
        tweeters_by_doi
            .entry(event.doi.clone())
            .or_default()
            .push(event.tweeter_id.clone());
    }
    for ids in authors_by_doi
        .values_mut()
        .chain(tweeters_by_doi.values_mut())
    {
        ids.sort_unstable();
        ids.dedup();
    }
    DoiIndex {
        authors_by_doi,
        tweeters_by_doi,
    }
}

/// Load all datasets, one worker per file.
pub fn load_corpus(paths: &CorpusPaths) -> Result<(Corpus, LoadReport)> {
    let ((authors, works), (events, (tweeters, golden))) = rayon::join(
        || rayon::join(|| load_authors(&paths.authors), || load_works(&paths.works)),
        || {
            rayon::join(
                || load_events(&paths.events),
                || {
                    rayon::join(
                        || load_tweeters(&paths.tweeters),
                        || paths.golden.as_deref().map(load_golden).transpose(),
                    )
                },
            )
        },
    );
    let (authors, authors_report) = authors?;
    let (works, works_report) = works?;
    let (events, events_report) = events?;
    let (tweeters, tweeters_report) = tweeters?;
    let mut files = vec![authors_report, works_report, events_report, tweeters_report];
    let golden = match golden? {
        Some((golden, report)) => {
            files.push(report);
            golden
        }
        None => Vec::new(),
    };
    let corpus = Corpus {
        authors,
        works,
        events,
        tweeters,
        golden,
    };
    Ok((corpus, LoadReport { files }))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::FileMissing(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

/// Drive a delimited file through `parse`, enforcing the header and the
/// malformed-row limit.
fn read_delimited<T>(
    dataset: &'static str,
    path: &Path,
    header: &[&str],
    mut parse: impl FnMut(&csv::StringRecord) -> Result<T, SkipReason>,
    mut accept: impl FnMut(T) -> Result<(), SkipReason>,
) -> Result<FileReport> {
    let file = open(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .has_headers(true)
        .from_reader(BufReader::new(file));
    let found = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let found_fields: Vec<&str> = found
        .iter()
        .enumerate()
        .map(|(i, h)| {
            if i == 0 {
                h.trim_start_matches('\u{feff}')
            } else {
                h
            }
        })
        .collect();
    if found_fields != header {
        return Err(Error::FormatError {
            path: path.to_path_buf(),
            expected: header.join(","),
            found: found_fields.join(","),
        });
    }

    let mut report = FileReport::new(dataset, path);
    let mut record = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                report.rows_read += 1;
                if record.len() != header.len() {
                    report.skip(SkipReason::WrongFieldCount);
                    continue;
                }
                match parse(&record).and_then(&mut accept) {
                    Ok(()) => report.rows_loaded += 1,
                    Err(reason) => report.skip(reason),
                }
            }
            Err(e) if e.is_io_error() => return Err(Error::csv(path, e)),
            Err(_) => {
                report.rows_read += 1;
                report.skip(SkipReason::Unreadable);
            }
        }
    }
    report.check_malformed_limit()?;
    Ok(report)
}

fn required(field: &str) -> Result<Id, SkipReason> {
    let field = field.trim();
    if field.is_empty() {
        Err(SkipReason::MissingField)
    } else {
        Ok(Id::from(field))
    }
}

fn optional(field: &str) -> Option<String> {
    let field = field.trim();
    (!field.is_empty()).then(|| field.to_string())
}

fn parse_country(field: &str) -> Result<Option<String>, SkipReason> {
    match optional(field) {
        None => Ok(None),
        Some(code) if code.len() == 2 && code.bytes().all(|b| b.is_ascii_alphabetic()) => {
            Ok(Some(code.to_ascii_uppercase()))
        }
        Some(_) => Err(SkipReason::InvalidCountry),
    }
}

fn parse_doi(field: &str) -> Result<Id, SkipReason> {
    if field.trim().is_empty() {
        return Err(SkipReason::MissingField);
    }
    normalize_doi(field)
        .map(Id::from)
        .map_err(|_| SkipReason::InvalidDoi)
}

/// Tracks first-seen ids; later duplicates are rejected.
struct Seen(HashSet<Id>);

impl Seen {
    fn new() -> Self {
        Seen(HashSet::new())
    }

    fn first(&mut self, id: &Id) -> Result<(), SkipReason> {
        if self.0.insert(id.clone()) {
            Ok(())
        } else {
            Err(SkipReason::DuplicateId)
        }
    }
}

pub fn load_authors(path: &Path) -> Result<(Vec<AuthorRecord>, FileReport)> {
    let mut authors = Vec::new();
    let mut seen = Seen::new();
    let report = read_delimited(
        "authors",
        path,
        &AUTHORS_HEADER,
        |r| {
            Ok(AuthorRecord {
                author_id: required(&r[0])?,
                display_name: r[1].trim().to_string(),
                orcid: optional(&r[2]),
                country: parse_country(&r[3])?,
            })
        },
        |author| {
            seen.first(&author.author_id)?;
            authors.push(author);
            Ok(())
        },
    )?;
    Ok((authors, report))
}

pub fn load_events(path: &Path) -> Result<(Vec<TweetEvent>, FileReport)> {
    let mut events = Vec::new();
    let mut seen = Seen::new();
    let report = read_delimited(
        "events",
        path,
        &EVENTS_HEADER,
        |r| {
            Ok(TweetEvent {
                tweet_id: required(&r[0])?,
                tweeter_id: required(&r[1])?,
                doi: parse_doi(&r[2])?,
            })
        },
        |event| {
            seen.first(&event.tweet_id)?;
            events.push(event);
            Ok(())
        },
    )?;
    Ok((events, report))
}

pub fn load_tweeters(path: &Path) -> Result<(Vec<TweeterProfile>, FileReport)> {
    let mut tweeters = Vec::new();
    let mut seen = Seen::new();
    let report = read_delimited(
        "tweeters",
        path,
        &TWEETERS_HEADER,
        |r| {
            let handle = r[1].trim();
            if handle.is_empty() {
                return Err(SkipReason::MissingField);
            }
            Ok(TweeterProfile {
                tweeter_id: required(&r[0])?,
                handle: handle.to_string(),
                profile_name: r[2].trim().to_string(),
            })
        },
        |tweeter| {
            seen.first(&tweeter.tweeter_id)?;
            tweeters.push(tweeter);
            Ok(())
        },
    )?;
    Ok((tweeters, report))
}

pub fn load_golden(path: &Path) -> Result<(Vec<GoldenPair>, FileReport)> {
    let mut golden = Vec::new();
    let mut seen = HashSet::new();
    let report = read_delimited(
        "golden",
        path,
        &GOLDEN_HEADER,
        |r| {
            Ok(GoldenPair {
                author_id: required(&r[0])?,
                tweeter_id: required(&r[1])?,
            })
        },
        |pair| {
            if !seen.insert(pair.clone()) {
                return Err(SkipReason::DuplicatePair);
            }
            golden.push(pair);
            Ok(())
        },
    )?;
    Ok((golden, report))
}

#[derive(Deserialize)]
struct RawWork {
    work_id: String,
    doi: String,
    author_ids: Vec<String>,
    #[serde(default)]
    concepts: Vec<ConceptScore>,
}

fn validate_work(raw: RawWork) -> Result<WorkRecord, SkipReason> {
    let work_id = required(&raw.work_id)?;
    let doi = parse_doi(&raw.doi)?;
    let mut author_ids: Vec<Id> = Vec::with_capacity(raw.author_ids.len());
    for id in raw.author_ids {
        let id = id.trim();
        if !id.is_empty() && !author_ids.iter().any(|seen| &**seen == id) {
            author_ids.push(Id::from(id));
        }
    }
    if author_ids.is_empty() {
        return Err(SkipReason::NoAuthors);
    }
    if raw
        .concepts
        .iter()
        .any(|c| !(0.0..=1.0).contains(&c.score) || c.name.trim().is_empty())
    {
        return Err(SkipReason::InvalidConcept);
    }
    Ok(WorkRecord {
        work_id,
        doi,
        author_ids,
        concepts: raw.concepts,
    })
}

pub fn load_works(path: &Path) -> Result<(Vec<WorkRecord>, FileReport)> {
    let reader = BufReader::new(open(path)?);
    let mut report = FileReport::new("works", path);
    let mut works = Vec::new();
    let mut seen = Seen::new();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        report.rows_read += 1;
        let work = serde_json::from_str::<RawWork>(&line)
            .map_err(|_| SkipReason::Unreadable)
            .and_then(validate_work)
            .and_then(|work| seen.first(&work.work_id).map(|()| work));
        match work {
            Ok(work) => {
                works.push(work);
                report.rows_loaded += 1;
            }
            Err(reason) => report.skip(reason),
        }
    }
    report.check_malformed_limit()?;
    Ok((works, report))
}

fn write_delimited<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut writer = csv::Writer::from_writer(BufWriter::new(create(path)?));
    writer
        .write_record(header)
        .map_err(|e| Error::csv(path, e))?;
    for row in rows {
        writer.write_record(row).map_err(|e| Error::csv(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

pub fn write_authors(path: &Path, authors: &[AuthorRecord]) -> Result<()> {
    write_delimited(
        path,
        &AUTHORS_HEADER,
        authors.iter().map(|a| {
            [
                &*a.author_id,
                a.display_name.as_str(),
                a.orcid.as_deref().unwrap_or(""),
                a.country.as_deref().unwrap_or(""),
            ]
        }),
    )
}

pub fn write_events(path: &Path, events: &[TweetEvent]) -> Result<()> {
    write_delimited(
        path,
        &EVENTS_HEADER,
        events
            .iter()
            .map(|e| [&*e.tweet_id, &*e.tweeter_id, &*e.doi]),
    )
}

pub fn write_tweeters(path: &Path, tweeters: &[TweeterProfile]) -> Result<()> {
    write_delimited(
        path,
        &TWEETERS_HEADER,
        tweeters
            .iter()
            .map(|t| [&*t.tweeter_id, t.handle.as_str(), t.profile_name.as_str()]),
    )
}

pub fn write_golden(path: &Path, golden: &[GoldenPair]) -> Result<()> {
    write_delimited(
        path,
        &GOLDEN_HEADER,
        golden.iter().map(|g| [&*g.author_id, &*g.tweeter_id]),
    )
}

pub fn write_works(path: &Path, works: &[WorkRecord]) -> Result<()> {
    let mut out = BufWriter::new(create(path)?);
    for work in works {
        serde_json::to_writer(&mut out, work).map_err(|e| Error::io(path, e.into()))?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Write every dataset to the conventional file names in `dir`.
pub fn write_corpus(dir: &Path, corpus: &Corpus) -> Result<CorpusPaths> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = CorpusPaths::in_dir(dir);
    write_authors(&paths.authors, &corpus.authors)?;
    write_works(&paths.works, &corpus.works)?;
    write_events(&paths.events, &corpus.events)?;
    write_tweeters(&paths.tweeters, &corpus.tweeters)?;
    if let Some(golden) = &paths.golden {
        write_golden(golden, &corpus.golden)?;
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn id(s: &str) -> Id {
        Id::from(s)
    }

    fn work(work_id: &str, doi: &str, authors: &[&str]) -> WorkRecord {
        WorkRecord {
            work_id: id(work_id),
            doi: id(doi),
            author_ids: authors.iter().map(|a| id(a)).collect(),
            concepts: Vec::new(),
        }
    }

    fn event(tweet: &str, tweeter: &str, doi: &str) -> TweetEvent {
        TweetEvent {
            tweet_id: id(tweet),
            tweeter_id: id(tweeter),
            doi: id(doi),
        }
    }

    fn write_file(dir: &Path, name: &str, contents: &str) -> PathBuf {
        let path = dir.join(name);
        std::fs::write(&path, contents).unwrap();
        path
    }

    #[test]
    fn doi_normalization_examples() {
        assert_eq!(
            normalize_doi("https://doi.org/10.1000/ABC").unwrap(),
            "10.1000/abc"
        );
        assert_eq!(normalize_doi("10.1000/abc").unwrap(), "10.1000/abc");
        assert_eq!(normalize_doi("  DOI:10.5/X ").unwrap(), "10.5/x");
        assert_eq!(
            normalize_doi("https://dx.doi.org/10.7/y").unwrap(),
            "10.7/y"
        );
        assert!(normalize_doi("example.com/paper").is_err());
        assert!(normalize_doi("").is_err());
        assert!(normalize_doi("https://doi.org/").is_err());
    }

    proptest! {
        #[test]
        fn doi_normalization_is_idempotent(
            prefix in prop::sample::select(vec!["", "https://doi.org/", "doi:", "HTTP://DOI.ORG/", " "]),
            body in "10\\.[0-9]{1,5}/[A-Za-z0-9._-]{1,12}",
        ) {
            let once = normalize_doi(&format!("{prefix}{body}")).unwrap();
            prop_assert_eq!(normalize_doi(&once).unwrap(), once.clone());
        }
    }

    #[test]
    fn index_examples() {
        let index = build_doi_index(&[work("W1", "d", &["A1", "A2"])], &[event("t1", "T1", "d")]);
        assert_eq!(index.authors_of("d"), &[id("A1"), id("A2")]);
        assert_eq!(index.tweeters_of("d"), &[id("T1")]);

        let index = build_doi_index(&[work("W1", "d", &["A1"]), work("W2", "d", &["A2"])], &[]);
        assert_eq!(index.authors_of("d"), &[id("A1"), id("A2")]);

        let index = build_doi_index(&[work("W1", "d", &["A1"])], &[event("t1", "T1", "e")]);
        assert_eq!(index.tweeters_of("e"), &[id("T1")]);
        assert!(!index.authors_by_doi.contains_key("e"));

        let index = build_doi_index(&[], &[]);
        assert!(index.authors_by_doi.is_empty() && index.tweeters_by_doi.is_empty());
    }

    #[test]
    fn index_deduplicates_tweeters() {
        let index = build_doi_index(&[], &[event("t1", "T1", "d"), event("t2", "T1", "d")]);
        assert_eq!(index.tweeters_of("d"), &[id("T1")]);
    }

    proptest! {
        #[test]
        fn index_author_sets_match_brute_force(
            works in prop::collection::vec(
                (0u8..20, prop::collection::vec(0u8..30, 1..5)),
                0..200,
            )
        ) {
            let works: Vec<WorkRecord> = works
                .iter()
                .enumerate()
                .map(|(i, (d, authors))| WorkRecord {
                    work_id: id(&format!("W{i}")),
                    doi: id(&format!("10.1/{d}")),
                    author_ids: authors.iter().map(|a| id(&format!("A{a}"))).collect(),
                    concepts: Vec::new(),
                })
                .collect();
            let index = build_doi_index(&works, &[]);
            for d in 0u8..20 {
                let doi = format!("10.1/{d}");
                let expected: BTreeSet<&str> = works
                    .iter()
                    .filter(|w| *w.doi == *doi)
                    .flat_map(|w| w.author_ids.iter().map(|a| &**a))
                    .collect();
                let got: Vec<&str> = index.authors_of(&doi).iter().map(|a| &**a).collect();
                prop_assert_eq!(got, expected.into_iter().collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn loads_clean_authors() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(
            dir.path(),
            "authors.csv",
            "author_id,display_name,orcid,country\n\
             A1,John Smith,0000-0001,us\n\
             A2,\"Smith, Jane\",,\n\
             A3,Ann Lee,,CA\n",
        );
        let (authors, report) = load_authors(&path).unwrap();
        assert_eq!(authors.len(), 3);
        assert_eq!(report.skipped_total(), 0);
        assert_eq!(authors[0].country.as_deref(), Some("US"));
        assert_eq!(authors[1].display_name, "Smith, Jane");
        assert_eq!(authors[1].orcid, None);
    }

    #[test]
    fn duplicate_author_keeps_first() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(
            dir.path(),
            "authors.csv",
            "author_id,display_name,orcid,country\nA1,First,,\nA1,Second,,\n",
        );
        let (authors, report) = load_authors(&path).unwrap();
        assert_eq!(authors.len(), 1);
        assert_eq!(authors[0].display_name, "First");
        assert_eq!(report.skipped[&SkipReason::DuplicateId], 1);
        assert_eq!(report.malformed(), 0);
    }

    #[test]
    fn event_missing_doi_is_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let mut contents = String::from("tweet_id,tweeter_id,doi\n");
        for i in 0..10 {
            contents.push_str(&format!("t{i},T1,10.1/{i}\n"));
        }
        contents.push_str("t10,T1,\n");
        let path = write_file(dir.path(), "events.csv", &contents);
        let (events, report) = load_events(&path).unwrap();
        assert_eq!(events.len(), 10);
        assert_eq!(report.skipped_total(), 1);
        assert_eq!(report.skipped[&SkipReason::MissingField], 1);
    }

    #[test]
    fn header_mismatch_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(
            dir.path(),
            "events.csv",
            "tweet,tweeter,doi\nt1,T1,10.1/x\n",
        );
        assert!(matches!(load_events(&path), Err(Error::FormatError { .. })));
    }

    #[test]
    fn missing_file() {
        let err = load_golden(Path::new("/definitely/not/here.csv")).unwrap_err();
        assert!(matches!(err, Error::FileMissing(_)));
    }

    #[test]
    fn too_many_malformed_rows_is_fatal() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(
            dir.path(),
            "events.csv",
            "tweet_id,tweeter_id,doi\nt1,T1,10.1/a\nt2,T1,not-a-doi\nt3,T2,10.1/b\n",
        );
        assert!(matches!(
            load_events(&path),
            Err(Error::ExcessiveMalformedRows {
                malformed: 1,
                total: 3,
                ..
            })
        ));
    }

    #[test]
    fn works_validation() {
        let dir = tempfile::tempdir().unwrap();
        let mut contents = String::new();
        for i in 0..20 {
            contents.push_str(&format!(
                r#"{{"work_id":"W{i}","doi":"https://doi.org/10.1/W{i}","author_ids":["A{i}","A{i}"],"concepts":[{{"name":"Medicine","level":0,"score":0.5}}]}}"#
            ));
            contents.push('\n');
        }
        contents.push_str(r#"{"work_id":"W99","doi":"10.1/x","author_ids":[]}"#);
        contents.push('\n');
        contents.push_str("{not json\n\n");
        let path = write_file(dir.path(), "works.jsonl", &contents);
        let (works, report) = load_works(&path).unwrap();
        assert_eq!(works.len(), 20);
        assert_eq!(&*works[3].doi, "10.1/w3");
        assert_eq!(works[3].author_ids.len(), 1);
        assert_eq!(report.rows_read, 22);
        assert_eq!(report.skipped[&SkipReason::NoAuthors], 1);
        assert_eq!(report.skipped[&SkipReason::Unreadable], 1);
    }

    #[test]
    fn round_trip_through_files() {
        let corpus = Corpus {
            authors: vec![
                AuthorRecord {
                    author_id: id("A1"),
                    display_name: "José \"Pepe\" Núñez, PhD".into(),
                    orcid: Some("0000-0002-1825-0097".into()),
                    country: Some("ES".into()),
                },
                AuthorRecord {
                    author_id: id("A2"),
                    display_name: String::new(),
                    orcid: None,
                    country: None,
                },
            ],
            works: vec![WorkRecord {
                work_id: id("W1"),
                doi: id("10.1/x"),
                author_ids: vec![id("A1"), id("A2")],
                concepts: vec![ConceptScore {
                    name: "Biology".into(),
                    level: 0,
                    score: 0.125,
                }],
            }],
            events: vec![event("t1", "T1", "10.1/x")],
            tweeters: vec![TweeterProfile {
                tweeter_id: id("T1"),
                handle: "@pepe".into(),
                profile_name: "Pepe, 🧪".into(),
            }],
            golden: vec![GoldenPair {
                author_id: id("A1"),
                tweeter_id: id("T1"),
            }],
        };
        let dir = tempfile::tempdir().unwrap();
        let paths = write_corpus(dir.path(), &corpus).unwrap();
        let (loaded, report) = load_corpus(&paths).unwrap();
        assert_eq!(loaded, corpus);
        assert!(report.files.iter().all(|f| f.skipped_total() == 0));
        assert_eq!(report.files.len(), 5);
    }
}
