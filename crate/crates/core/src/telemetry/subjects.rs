use std::collections::{BTreeMap, BTreeSet};

use super::annotate::AnnotatedEntry;
use crate::log::Module;

/// Subject counts, most frequent first, ties alphabetical.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SubjectDistribution {
    pub rows: Vec<(String, u64)>,
    /// Ids in scope that could not be given a subject.
    pub unknown: u64,
}

impl SubjectDistribution {
    pub fn from_counts(counts: impl IntoIterator<Item = (String, u64)>, unknown: u64) -> Self {
        let mut rows: Vec<(String, u64)> = counts.into_iter().filter(|(_, n)| *n > 0).collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        SubjectDistribution { rows, unknown }
    }

    pub fn total(&self) -> u64 {
        self.rows.iter().map(|(_, n)| n).sum()
    }

    pub fn counts(&self) -> Vec<u64> {
        self.rows.iter().map(|(_, n)| *n).collect()
    }
}

/// Counts subjects over the bib ids returned by successful `module`
/// requests: once per id occurrence, or with `per_request` once per
/// subject per request.
pub fn subject_distribution(annotated: &[AnnotatedEntry], module: Module, per_request: bool) -> SubjectDistribution {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut unknown = 0;
    for a in annotated
        .iter()
        .filter(|a| a.entry.module == module && a.entry.is_success())
    {
        if per_request {
            let subjects: BTreeSet<&str> = a.annotations.iter().filter_map(|b| b.subject.as_deref()).collect();
            for s in subjects {
                *counts.entry(s.to_string()).or_default() += 1;
            }
            if a.annotations.iter().any(|b| b.subject.is_none()) {
                unknown += 1;
            }
        } else {
            for b in &a.annotations {
                match &b.subject {
                    Some(s) => *counts.entry(s.clone()).or_default() += 1,
                    None => unknown += 1,
                }
            }
        }
    }
    SubjectDistribution::from_counts(counts, unknown)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    /// Slope of log(count) against log(rank); negative for a long tail.
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub ranks: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum FitError {
    #[error("need at least 3 nonzero ranks, found {0}")]
    TooFewRanks(usize),
}

/// Least-squares line through (ln rank, ln count) for the positive counts
/// sorted in descending order, optionally dropping counts below
/// `min_count`.
///
/// Equal counts give a flat line with exponent 0 and R² taken as 1.
pub fn fit_rank_frequency(counts: &[f64], min_count: Option<f64>) -> Result<PowerLawFit, FitError> {
    let mut sorted: Vec<f64> = counts
        .iter()
        .copied()
        .filter(|&c| c > 0.0 && c.is_finite() && min_count.is_none_or(|m| c >= m))
        .collect();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let n = sorted.len();
    if n < 3 {
        return Err(FitError::TooFewRanks(n));
    }
    let xs: Vec<f64> = (1..=n).map(|r| (r as f64).ln()).collect();
    let ys: Vec<f64> = sorted.iter().map(|c| c.ln()).collect();
    let mean_x = xs.iter().sum::<f64>() / n as f64;
    let mean_y = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let syy: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
    let exponent = sxy / sxx;
    let intercept = mean_y - exponent * mean_x;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        let ss_res: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - (intercept + exponent * x)).powi(2))
            .sum();
        1.0 - ss_res / syy
    };
    Ok(PowerLawFit {
        exponent,
        intercept,
        r_squared,
        ranks: n,
    })
}

pub fn fit_power_law(dist: &SubjectDistribution, min_count: Option<u64>) -> Result<PowerLawFit, FitError> {
    let counts: Vec<f64> = dist.counts().into_iter().map(|c| c as f64).collect();
    fit_rank_frequency(&counts, min_count.map(|m| m as f64))
}
