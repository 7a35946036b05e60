use std::collections::HashMap;

use crate::log::{ApiLogEntry, Module};

/// Word statistics over a query corpus. `total_words` counts every
/// occurrence; `unique_forms` counts each distinct token once.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TextStats {
    pub total_words: u64,
    pub unique_forms: u64,
    pub top: Vec<(String, u64)>,
}

pub const TOP_WORDS: usize = 5;

/// Lowercases, splits on whitespace and trims non-alphanumeric characters
/// from both ends of each token. Tokens left empty are dropped.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|t| !t.is_empty())
}

/// Text statistics over the `q` parameter of every `module` entry.
pub fn mine_queries(entries: &[ApiLogEntry], module: Module) -> TextStats {
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut total = 0;
    for q in entries
        .iter()
        .filter(|e| e.module == module)
        .filter_map(|e| e.params.get("q"))
    {
        for token in tokenize(q) {
            total += 1;
            *counts.entry(token).or_default() += 1;
        }
    }
    let unique_forms = counts.len() as u64;
    let mut top: Vec<(String, u64)> = counts.into_iter().collect();
    top.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    top.truncate(TOP_WORDS);
    TextStats {
        total_words: total,
        unique_forms,
        top,
    }
}
