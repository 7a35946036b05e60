//! Log analytics over the middleware's transaction log.
//!
//! The workflow is extract, annotate, aggregate: [`parse_logs`] reads
//! JSON Lines logs, [`annotate`] joins every bibliographic id to its call
//! number and subject, and the remaining functions build heat maps, subject
//! distributions with a rank-frequency fit, identifier traces, query text
//! statistics and monthly series.

mod annotate;
mod heatmap;
mod mine;
mod parse;
mod series;
mod subjects;
mod tables;

pub use annotate::{annotate, AnnotatedEntry, Annotation, BibAnnotation};
pub use heatmap::{heatmap, DensityGrid, GridSpec, HeatMode, HeatmapResult};
pub use mine::{mine_queries, tokenize, TextStats};
pub use parse::{parse_log_text, parse_logs, ParsedLogs};
pub use series::{time_series, trace_identifier, YearMonth};
pub use subjects::{fit_power_law, fit_rank_frequency, subject_distribution, FitError, PowerLawFit, SubjectDistribution};
pub use tables::{
    recommend_table, subject_table, wayfinder_table, write_recommend_csv, write_subject_csv,
    write_wayfinder_csv, RecommendRow, SubjectRow, WayfinderRow,
};
