//! File-backed catalog, circulation, article index and database list.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::diag::{read_csv, Diagnostic, LoadError};
use crate::lccn::{CallNumber, CallNumberRange};

pub const CATALOG_HEADER: [&str; 4] = ["bib_id", "title", "call_number", "format"];
pub const CIRCULATION_HEADER: [&str; 2] = ["bib_id", "charge_date"];
pub const ARTICLES_HEADER: [&str; 3] = ["journal_title", "article_title", "subject"];
pub const DATABASES_HEADER: [&str; 3] = ["name", "range_start", "range_end"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Print,
    Ebook,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Print => "print",
            Format::Ebook => "ebook",
        })
    }
}

/// Which formats a range scan returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FormatFilter {
    #[default]
    All,
    Only(Format),
}

impl FormatFilter {
    fn admits(self, format: Format) -> bool {
        match self {
            FormatFilter::All => true,
            FormatFilter::Only(f) => f == format,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BibRecord {
    pub bib_id: String,
    pub title: String,
    pub call_number: CallNumber,
    pub format: Format,
}

/// `prefix_digits`, e.g. `uiu_8127460` or `hat_817483`.
pub fn is_valid_bib_id(id: &str) -> bool {
    match id.split_once('_') {
        Some((prefix, digits)) => {
            !prefix.is_empty()
                && prefix.bytes().all(|b| b.is_ascii_lowercase())
                && !digits.is_empty()
                && digits.bytes().all(|b| b.is_ascii_digit())
        }
        None => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub journal_title: String,
    pub article_title: String,
    pub subject: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArticleResult {
    pub journal_title: String,
    pub article_title: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatabaseEntry {
    pub name: String,
    pub subject_ranges: Vec<CallNumberRange>,
}

#[derive(Debug, Clone)]
pub struct CorpusPaths {
    pub catalog: PathBuf,
    pub circulation: PathBuf,
    pub articles: PathBuf,
    pub databases: PathBuf,
}

#[derive(Debug, Clone)]
pub struct CorpusLoad {
    pub store: CorpusStore,
    pub diagnostics: Vec<Diagnostic>,
}

/// Catalog records indexed by id and by call number, with circulation
/// counts joined by id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorpusStore {
    // sorted by (call_number, bib_id)
    records: Vec<BibRecord>,
    by_id: HashMap<String, usize>,
    charges: HashMap<String, u64>,
    articles: Vec<Article>,
    databases: Vec<DatabaseEntry>,
}

impl CorpusStore {
    /// Builds a store from in-memory parts. Duplicate bib ids are an error.
    pub fn new(
        mut records: Vec<BibRecord>,
        charges: HashMap<String, u64>,
        articles: Vec<Article>,
        databases: Vec<DatabaseEntry>,
    ) -> Result<Self, String> {
        records.sort_by(|a, b| {
            a.call_number
                .cmp(&b.call_number)
                .then_with(|| a.bib_id.cmp(&b.bib_id))
        });
        let mut by_id = HashMap::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            if by_id.insert(r.bib_id.clone(), i).is_some() {
                return Err(format!("duplicate bib_id {}", r.bib_id));
            }
        }
        Ok(CorpusStore {
            records,
            by_id,
            charges,
            articles,
            databases,
        })
    }

    pub fn load(paths: &CorpusPaths) -> Result<CorpusLoad, LoadError> {
        let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| LoadError::io(p, e));
        let mut diagnostics = Vec::new();

        let catalog_src = paths.catalog.display().to_string();
        let records = parse_catalog(&read(&paths.catalog)?, &catalog_src, &mut diagnostics)?;
        let charges = parse_circulation(
            &read(&paths.circulation)?,
            &paths.circulation.display().to_string(),
            &mut diagnostics,
        )?;
        let articles = parse_articles(
            &read(&paths.articles)?,
            &paths.articles.display().to_string(),
            &mut diagnostics,
        )?;
        let databases = parse_databases(
            &read(&paths.databases)?,
            &paths.databases.display().to_string(),
            &mut diagnostics,
        )?;
        let store = CorpusStore::new(records, charges, articles, databases).map_err(|m| {
            LoadError::Fatal(Diagnostic::new(&catalog_src, 0, m))
        })?;
        Ok(CorpusLoad { store, diagnostics })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// All records in call-number order.
    pub fn records(&self) -> &[BibRecord] {
        &self.records
    }

    pub fn get(&self, bib_id: &str) -> Option<&BibRecord> {
        self.by_id.get(bib_id).map(|&i| &self.records[i])
    }

    pub fn articles(&self) -> &[Article] {
        &self.articles
    }

    pub fn databases(&self) -> &[DatabaseEntry] {
        &self.databases
    }

    /// Records whose call number lies in `range`, in call-number order.
    pub fn books_in_range(&self, range: &CallNumberRange, filter: FormatFilter) -> Vec<&BibRecord> {
        let first = self
            .records
            .partition_point(|r| r.call_number < *range.start());
        self.records[first..]
            .iter()
            .take_while(|r| r.call_number <= *range.end())
            .filter(|r| filter.admits(r.format))
            .collect()
    }

    /// Charges recorded for `bib_id`; 0 when it never circulated.
    pub fn circulation_count(&self, bib_id: &str) -> u64 {
        self.charges.get(bib_id).copied().unwrap_or(0)
    }

    pub fn total_charges(&self) -> u64 {
        self.charges.values().sum()
    }

    /// Articles whose subject contains `query` as a whole word or phrase,
    /// case-insensitively, ordered by journal then article title.
    pub fn article_search(&self, query: &str) -> Vec<ArticleResult> {
        let query = query.trim().to_lowercase();
        if query.is_empty() {
            return Vec::new();
        }
        let mut hits: Vec<ArticleResult> = self
            .articles
            .iter()
            .filter(|a| contains_whole_word(&a.subject.to_lowercase(), &query))
            .map(|a| ArticleResult {
                journal_title: a.journal_title.clone(),
                article_title: a.article_title.clone(),
            })
            .collect();
        hits.sort();
        hits
    }
}

fn contains_whole_word(haystack: &str, needle: &str) -> bool {
    let is_word = |c: Option<char>| c.is_some_and(char::is_alphanumeric);
    haystack.match_indices(needle).any(|(i, m)| {
        !is_word(haystack[..i].chars().next_back()) && !is_word(haystack[i + m.len()..].chars().next())
    })
}

fn parse_charge_date(s: &str) -> bool {
    let s = s.trim();
    DateTime::parse_from_rfc3339(s).is_ok()
        || NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S").is_ok()
        || NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S").is_ok()
        || NaiveDate::parse_from_str(s, "%Y-%m-%d").is_ok()
}

#[derive(Deserialize)]
struct CatalogRow {
    bib_id: String,
    title: String,
    call_number: String,
    format: String,
}

pub fn parse_catalog(
    text: &str,
    source: &str,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<Vec<BibRecord>, LoadError> {
    let mut records = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (line, row) in read_csv::<CatalogRow>(text, source, &CATALOG_HEADER)? {
        let record = row.and_then(|r| {
            if !is_valid_bib_id(&r.bib_id) {
                return Err(format!("bib_id {:?} does not match prefix_digits", r.bib_id));
            }
            let call_number = CallNumber::parse(&r.call_number)
                .map_err(|e| format!("call_number {:?}: {e}", r.call_number))?;
            let format = match r.format.to_ascii_lowercase().as_str() {
                "print" => Format::Print,
                "ebook" => Format::Ebook,
                other => return Err(format!("unknown format {other:?}")),
            };
            Ok(BibRecord {
                bib_id: r.bib_id,
                title: r.title,
                call_number,
                format,
            })
        });
        match record {
            Ok(r) => {
                if let Some(first) = seen.insert(r.bib_id.clone(), line) {
                    return Err(LoadError::Fatal(Diagnostic::new(
                        source,
                        line,
                        format!("duplicate bib_id {} (first on line {first})", r.bib_id),
                    )));
                }
                records.push(r);
            }
            Err(msg) => diagnostics.push(Diagnostic::new(source, line, msg)),
        }
    }
    Ok(records)
}

#[derive(Deserialize)]
struct ChargeRow {
    bib_id: String,
    charge_date: String,
}

/// One row per charge; returns the per-id totals.
pub fn parse_circulation(
    text: &str,
    source: &str,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<HashMap<String, u64>, LoadError> {
    let mut counts = HashMap::new();
    for (line, row) in read_csv::<ChargeRow>(text, source, &CIRCULATION_HEADER)? {
        let row = row.and_then(|r| {
            if !is_valid_bib_id(&r.bib_id) {
                Err(format!("bib_id {:?} does not match prefix_digits", r.bib_id))
            } else if !parse_charge_date(&r.charge_date) {
                Err(format!("charge_date {:?} is not an ISO 8601 date", r.charge_date))
            } else {
                Ok(r)
            }
        });
        match row {
            Ok(r) => *counts.entry(r.bib_id).or_insert(0) += 1,
            Err(msg) => diagnostics.push(Diagnostic::new(source, line, msg)),
        }
    }
    Ok(counts)
}

pub fn parse_articles(
    text: &str,
    source: &str,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<Vec<Article>, LoadError> {
    let mut articles = Vec::new();
    for (line, row) in read_csv::<Article>(text, source, &ARTICLES_HEADER)? {
        match row {
            Ok(a) => articles.push(a),
            Err(msg) => diagnostics.push(Diagnostic::new(source, line, msg)),
        }
    }
    Ok(articles)
}

#[derive(Deserialize)]
struct DatabaseRow {
    name: String,
    range_start: String,
    range_end: String,
}

/// Rows sharing a name merge into one entry, in order of first appearance.
pub fn parse_databases(
    text: &str,
    source: &str,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<Vec<DatabaseEntry>, LoadError> {
    let mut entries: Vec<DatabaseEntry> = Vec::new();
    for (line, row) in read_csv::<DatabaseRow>(text, source, &DATABASES_HEADER)? {
        let parsed = row.and_then(|r| {
            let start = CallNumber::parse(&r.range_start).map_err(|e| format!("range_start: {e}"))?;
            let end = CallNumber::parse(&r.range_end).map_err(|e| format!("range_end: {e}"))?;
            let range = CallNumberRange::new(start, end).map_err(|e| e.to_string())?;
            Ok((r.name, range))
        });
        match parsed {
            Ok((name, range)) => match entries.iter_mut().find(|e| e.name == name) {
                Some(e) => e.subject_ranges.push(range),
                None => entries.push(DatabaseEntry {
                    name,
                    subject_ranges: vec![range],
                }),
            },
            Err(msg) => diagnostics.push(Diagnostic::new(source, line, msg)),
        }
    }
    Ok(entries)
}
