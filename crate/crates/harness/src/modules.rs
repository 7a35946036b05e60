//! Synthetic traffic for the app modules the gateway does not serve:
//! catalog and journal searches, item displays, account views and so on.
//! Their entries share the gateway's log schema so traces and monthly
//! series span every module.

use std::collections::BTreeMap;

use biblio_core::corpus::CorpusStore;
use biblio_core::log::{ApiLogEntry, Module};
use chrono::{DateTime, Duration, Utc};
use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::world::{STUDY_DAYS, STUDY_START};

/// Entry counts per module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModuleMix {
    pub catalog: usize,
    pub journal: usize,
    pub display: usize,
    pub hoot: usize,
    pub account: usize,
    pub topicspace: usize,
    pub citation: usize,
}

impl Default for ModuleMix {
    fn default() -> Self {
        ModuleMix {
            catalog: 300,
            journal: 150,
            display: 200,
            hoot: 40,
            account: 40,
            topicspace: 30,
            citation: 30,
        }
    }
}

impl ModuleMix {
    pub fn none() -> Self {
        ModuleMix {
            catalog: 0,
            journal: 0,
            display: 0,
            hoot: 0,
            account: 0,
            topicspace: 0,
            citation: 0,
        }
    }

    pub fn total(&self) -> usize {
        self.catalog + self.journal + self.display + self.hoot + self.account + self.topicspace + self.citation
    }
}

/// Query vocabulary in falling popularity. Some forms carry punctuation or
/// capitals so that tokenisation has work to do.
const VOCABULARY: &[&str] = &[
    "american", "literature", "history", "Poetry", "film", "the", "novel", "shakespeare,", "games",
    "english", "women", "war", "philosophy", "dogs", "cats", "calculus", "civil", "modern", "criticism",
    "(drama)", "Faulkner", "Morrison", "cinema", "jazz", "reconstruction", "statistics", "poe", "video",
    "fiction", "children's",
];

fn encode_query(q: &str) -> String {
    let mut out = String::with_capacity(q.len());
    for b in q.bytes() {
        match b {
            b' ' => out.push('+'),
            b if b.is_ascii_alphanumeric() || b"-_.~".contains(&b) => out.push(b as char),
            b => out.push_str(&format!("%{b:02X}")),
        }
    }
    out
}

/// Generates the mix over the study year, ordered by timestamp. Displayed,
/// cited and account items are drawn by circulation.
pub fn gen_module_logs(seed: u64, corpus: &CorpusStore, mix: &ModuleMix, collection: &str) -> Vec<ApiLogEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = WeightedIndex::new((1..=VOCABULARY.len()).map(|r| 1.0 / r as f64)).expect("positive weights");
    let records = corpus.records();
    let items = (!records.is_empty()).then(|| {
        WeightedIndex::new(records.iter().map(|r| corpus.circulation_count(&r.bib_id) as f64 + 1.0))
            .expect("positive weights")
    });
    let start: DateTime<Utc> = STUDY_START.and_hms_opt(0, 0, 0).expect("valid time").and_utc();
    let year = STUDY_DAYS * 86_400;

    let plan = [
        (Module::Catalog, mix.catalog),
        (Module::Journal, mix.journal),
        (Module::Display, mix.display),
        (Module::Hoot, mix.hoot),
        (Module::Account, mix.account),
        (Module::Topicspace, mix.topicspace),
        (Module::Citation, mix.citation),
    ];
    let mut out = Vec::with_capacity(mix.total());
    for (module, count) in plan {
        for _ in 0..count {
            let timestamp = start + Duration::seconds(rng.gen_range(0..year));
            let item = |rng: &mut ChaCha8Rng| {
                items
                    .as_ref()
                    .map(|w| records[w.sample(rng)].bib_id.clone())
            };
            let mut params = BTreeMap::new();
            let mut bib_ids = Vec::new();
            let uri = match module {
                Module::Catalog | Module::Journal => {
                    let n = rng.gen_range(1..=4);
                    let q: Vec<&str> = (0..n).map(|_| VOCABULARY[words.sample(&mut rng)]).collect();
                    let q = q.join(" ");
                    let path = if module == Module::Catalog { "catalog" } else { "journal" };
                    let uri = format!("/api/{path}/search?q={}", encode_query(&q));
                    params.insert("q".to_string(), q);
                    uri
                }
                Module::Hoot => "/api/hoot/status".to_string(),
                Module::Account => {
                    for _ in 0..rng.gen_range(1..=3) {
                        bib_ids.extend(item(&mut rng));
                    }
                    "/api/account/checkouts".to_string()
                }
                _ => {
                    bib_ids.extend(item(&mut rng));
                    let id = bib_ids.first().map_or("none", String::as_str);
                    match module {
                        Module::Display => format!("/api/display/{collection}/{id}"),
                        Module::Topicspace => format!("/api/topicspace/{collection}/{id}"),
                        _ => {
                            params.insert("style".to_string(), "apa".to_string());
                            format!("/api/citation/{collection}/{id}?style=apa")
                        }
                    }
                }
            };
            out.push(ApiLogEntry {
                timestamp,
                module,
                uri,
                params,
                status: 200,
                bib_ids,
            });
        }
    }
    out.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.uri.cmp(&b.uri)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use biblio_core::telemetry::tokenize;

    #[test]
    fn queries_round_trip_through_the_uri() {
        assert_eq!(encode_query("children's (drama)"), "children%27s+%28drama%29");
    }

    #[test]
    fn mix_is_deterministic_and_complete() {
        let corpus = CorpusStore::default();
        let a = gen_module_logs(4, &corpus, &ModuleMix::default(), "uiu_undergrad");
        assert_eq!(a, gen_module_logs(4, &corpus, &ModuleMix::default(), "uiu_undergrad"));
        assert_eq!(a.len(), ModuleMix::default().total());
        assert!(a.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
        let catalog: Vec<_> = a.iter().filter(|e| e.module == Module::Catalog).collect();
        assert_eq!(catalog.len(), 300);
        assert!(catalog.iter().all(|e| tokenize(&e.params["q"]).count() >= 1));
        assert!(a.iter().all(|e| e.validate().is_ok()));
        assert!(gen_module_logs(4, &corpus, &ModuleMix::none(), "x").is_empty());
    }
}
