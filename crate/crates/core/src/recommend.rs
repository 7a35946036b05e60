//! Location-based recommendation.
//!
//! From a patron position the pipeline finds nearby shelf ranges, gathers
//! the catalog records shelved there, keeps the most-circulated print
//! books, adds e-books whose call numbers would shelve them nearby, and
//! finally appends journal databases relevant to the ranges' subjects.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{BibRecord, CorpusStore, Format, FormatFilter};
use crate::geom::Point;
use crate::lccn::{CallNumber, CallNumberRange, ClassificationOutline};
use crate::locate::PatronLocation;
use crate::stacksmap::StackMap;

pub const WIRE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecommenderConfig {
    /// Search radius in map units; `None` uses the stack map's default of
    /// 1.5 shelf widths.
    pub radius: Option<f64>,
    pub max_items: usize,
    pub max_ebooks: usize,
    /// A journal is recommended when its share of article results is
    /// strictly greater than this.
    pub majority_threshold: f64,
}

impl Default for RecommenderConfig {
    fn default() -> Self {
        RecommenderConfig {
            radius: None,
            max_items: 5,
            max_ebooks: 3,
            majority_threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Print,
    Ebook,
    Database,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bib_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub call_number: Option<CallNumber>,
    pub title: String,
    /// Circulation count for books, journal share for databases.
    pub score: f64,
}

impl Recommendation {
    fn book(record: &BibRecord, score: f64) -> Self {
        Recommendation {
            kind: match record.format {
                Format::Print => Kind::Print,
                Format::Ebook => Kind::Ebook,
            },
            bib_id: Some(record.bib_id.clone()),
            name: None,
            call_number: Some(record.call_number.clone()),
            title: record.title.clone(),
            score,
        }
    }

    fn database(name: &str, score: f64) -> Self {
        Recommendation {
            kind: Kind::Database,
            bib_id: None,
            name: Some(name.to_string()),
            call_number: None,
            title: name.to_string(),
            score,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecommendationSet {
    pub location: PatronLocation,
    pub ranges_used: Vec<CallNumberRange>,
    pub items: Vec<Recommendation>,
}

impl RecommendationSet {
    /// No shelf was within reach of the patron.
    pub fn is_empty(&self) -> bool {
        self.ranges_used.is_empty()
    }

    /// Identifiers of the book items, in response order.
    pub fn bib_ids(&self) -> Vec<String> {
        self.items.iter().filter_map(|i| i.bib_id.clone()).collect()
    }

    pub fn to_wire(&self) -> RecommendationResponse {
        RecommendationResponse {
            v: WIRE_VERSION,
            location: WireLocation {
                x: self.location.x,
                y: self.location.y,
            },
            ranges: self
                .ranges_used
                .iter()
                .map(|r| WireRange {
                    start: r.start().clone(),
                    end: r.end().clone(),
                })
                .collect(),
            items: self.items.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireLocation {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireRange {
    pub start: CallNumber,
    pub end: CallNumber,
}

/// JSON body of `GET /api/recommend/popularnear`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationResponse {
    pub v: u32,
    pub location: WireLocation,
    pub ranges: Vec<WireRange>,
    pub items: Vec<Recommendation>,
}

impl RecommendationResponse {
    pub fn bib_ids(&self) -> Vec<String> {
        self.items.iter().filter_map(|i| i.bib_id.clone()).collect()
    }
}

/// The subject head term: text before the first period, colon or opening
/// parenthesis. `"Philosophy (General)"` becomes `"Philosophy"`.
pub fn head_term(label: &str) -> &str {
    let cut = label.find(['.', ':', '(']).unwrap_or(label.len());
    label[..cut].trim()
}

/// Article-search query for a shelf range, from the subject of its start.
pub fn subject_query_from_range(range: &CallNumberRange, outline: &ClassificationOutline) -> Option<String> {
    let label = outline.classify(range.start()).ok()?;
    let term = head_term(label);
    (!term.is_empty()).then(|| term.to_string())
}

/// Print candidates inside `ranges` with at least one charge, most
/// circulated first, ties by bib id, at most `max_items`.
pub fn popular_books(
    corpus: &CorpusStore,
    ranges: &[CallNumberRange],
    candidates: &[&BibRecord],
    max_items: usize,
) -> Vec<Recommendation> {
    let mut seen = HashSet::new();
    let mut scored: Vec<(&BibRecord, u64)> = candidates
        .iter()
        .copied()
        .filter(|r| r.format == Format::Print)
        .filter(|r| ranges.iter().any(|rg| rg.contains(&r.call_number)))
        .filter(|r| seen.insert(r.bib_id.as_str()))
        .map(|r| (r, corpus.circulation_count(&r.bib_id)))
        .filter(|(_, n)| *n > 0)
        .collect();
    scored.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.bib_id.cmp(&b.0.bib_id)));
    scored.truncate(max_items);
    scored
        .into_iter()
        .map(|(r, n)| Recommendation::book(r, n as f64))
        .collect()
}

/// E-books whose call numbers fall in `ranges`, in call-number order.
pub fn ebook_suggestions(corpus: &CorpusStore, ranges: &[CallNumberRange], max_ebooks: usize) -> Vec<Recommendation> {
    let mut seen = HashSet::new();
    let mut hits: Vec<&BibRecord> = ranges
        .iter()
        .flat_map(|r| corpus.books_in_range(r, FormatFilter::Only(Format::Ebook)))
        .filter(|r| seen.insert(r.bib_id.as_str()))
        .collect();
    hits.sort_by(|a, b| {
        a.call_number
            .cmp(&b.call_number)
            .then_with(|| a.bib_id.cmp(&b.bib_id))
    });
    hits.truncate(max_ebooks);
    hits.into_iter()
        .map(|r| Recommendation::book(r, corpus.circulation_count(&r.bib_id) as f64))
        .collect()
}

/// Journals holding a majority of the article results for a range's
/// subject, then curated databases whose ranges intersect the patron's.
///
/// A curated database scores the fraction of the patron's ranges it
/// intersects. Names are emitted once.
pub fn database_suggestions(
    corpus: &CorpusStore,
    outline: &ClassificationOutline,
    ranges: &[CallNumberRange],
    majority_threshold: f64,
) -> Vec<Recommendation> {
    let mut out: Vec<Recommendation> = Vec::new();
    let mut names = HashSet::new();
    let mut queried = HashSet::new();
    for range in ranges {
        let Some(query) = subject_query_from_range(range, outline) else {
            continue;
        };
        if !queried.insert(query.clone()) {
            continue;
        }
        let hits = corpus.article_search(&query);
        if hits.is_empty() {
            continue;
        }
        let mut per_journal: BTreeMap<&str, usize> = BTreeMap::new();
        for h in &hits {
            *per_journal.entry(h.journal_title.as_str()).or_default() += 1;
        }
        // BTreeMap iteration is by name, so max_by keeps the last maximum;
        // reverse to prefer the alphabetically first journal on ties.
        let (journal, count) = per_journal
            .iter()
            .rev()
            .max_by_key(|(_, c)| **c)
            .map(|(j, c)| (*j, *c))
            .expect("non-empty");
        let share = count as f64 / hits.len() as f64;
        if share > majority_threshold && names.insert(journal.to_string()) {
            out.push(Recommendation::database(journal, share));
        }
    }
    if !ranges.is_empty() {
        for db in corpus.databases() {
            let hit = ranges
                .iter()
                .filter(|r| db.subject_ranges.iter().any(|s| s.intersects(r)))
                .count();
            if hit > 0 && names.insert(db.name.clone()) {
                out.push(Recommendation::database(&db.name, hit as f64 / ranges.len() as f64));
            }
        }
    }
    out
}

/// The recommendation pipeline over loaded stores.
#[derive(Debug, Clone, Copy)]
pub struct Recommender<'a> {
    pub map: &'a StackMap,
    pub corpus: &'a CorpusStore,
    pub outline: &'a ClassificationOutline,
    pub config: RecommenderConfig,
}

impl<'a> Recommender<'a> {
    pub fn new(
        map: &'a StackMap,
        corpus: &'a CorpusStore,
        outline: &'a ClassificationOutline,
        config: RecommenderConfig,
    ) -> Self {
        Recommender {
            map,
            corpus,
            outline,
            config,
        }
    }

    pub fn radius(&self) -> f64 {
        self.config.radius.unwrap_or_else(|| self.map.default_radius())
    }

    pub fn recommend_near(&self, p: Point) -> RecommendationSet {
        self.recommend_at(PatronLocation::exact(p))
    }

    /// Runs the full pipeline: shelf ranges, in-range books, popularity
    /// filter, e-book merge and database suggestions, in that order.
    pub fn recommend_at(&self, location: PatronLocation) -> RecommendationSet {
        let ranges = self.map.ranges_for_location(location.point(), self.radius());
        if ranges.is_empty() {
            return RecommendationSet {
                location,
                ranges_used: ranges,
                items: Vec::new(),
            };
        }
        let candidates: Vec<&BibRecord> = ranges
            .iter()
            .flat_map(|r| self.corpus.books_in_range(r, FormatFilter::All))
            .collect();
        let mut items = popular_books(self.corpus, &ranges, &candidates, self.config.max_items);
        items.extend(ebook_suggestions(self.corpus, &ranges, self.config.max_ebooks));
        items.extend(database_suggestions(
            self.corpus,
            self.outline,
            &ranges,
            self.config.majority_threshold,
        ));
        RecommendationSet {
            location,
            ranges_used: ranges,
            items,
        }
    }
}
