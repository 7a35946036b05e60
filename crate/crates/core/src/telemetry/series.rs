use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike, Utc};

use crate::log::{ApiLogEntry, Module};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct YearMonth {
    pub year: i32,
    /// 1 through 12.
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Option<Self> {
        (1..=12).contains(&month).then_some(YearMonth { year, month })
    }

    pub fn of(t: DateTime<Utc>) -> Self {
        YearMonth {
            year: t.year(),
            month: t.month(),
        }
    }

    pub fn succ(self) -> Self {
        if self.month == 12 {
            YearMonth {
                year: self.year + 1,
                month: 1,
            }
        } else {
            YearMonth {
                year: self.year,
                month: self.month + 1,
            }
        }
    }

    /// Every month from `self` through `end` inclusive.
    pub fn through(self, end: YearMonth) -> impl Iterator<Item = YearMonth> {
        std::iter::successors(Some(self), |m| Some(m.succ())).take_while(move |m| *m <= end)
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("expected YYYY-MM, got {s:?}");
        let (y, m) = s.split_once('-').ok_or_else(bad)?;
        let year = y.parse().map_err(|_| bad())?;
        let month = m.parse().map_err(|_| bad())?;
        YearMonth::new(year, month).ok_or_else(bad)
    }
}

/// Per-month entry counts for `module`, zero-filled. Without a window the
/// series spans the first through last month that has an entry; with one,
/// it covers the window exactly and ignores entries outside it.
pub fn time_series(
    entries: &[ApiLogEntry],
    module: Module,
    window: Option<(YearMonth, YearMonth)>,
) -> Vec<(YearMonth, u64)> {
    let mut counts: BTreeMap<YearMonth, u64> = BTreeMap::new();
    for e in entries.iter().filter(|e| e.module == module) {
        *counts.entry(YearMonth::of(e.timestamp)).or_default() += 1;
    }
    let (first, last) = match window {
        Some(w) => w,
        None => match (counts.keys().next(), counts.keys().next_back()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Vec::new(),
        },
    };
    first.through(last).map(|m| (m, counts.get(&m).copied().unwrap_or(0))).collect()
}

/// Number of entries per module whose bib ids include `bib_id`. Every
/// module appears in the result.
pub fn trace_identifier(bib_id: &str, entries: &[ApiLogEntry]) -> BTreeMap<Module, u64> {
    let mut out: BTreeMap<Module, u64> = Module::ALL.iter().map(|&m| (m, 0)).collect();
    for e in entries.iter().filter(|e| e.bib_ids.iter().any(|b| b == bib_id)) {
        *out.entry(e.module).or_default() += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn at(y: i32, m: u32, d: u32, module: Module, ids: &[&str]) -> ApiLogEntry {
        ApiLogEntry {
            timestamp: Utc.with_ymd_and_hms(y, m, d, 12, 0, 0).unwrap(),
            module,
            uri: "/x".into(),
            params: Default::default(),
            status: 200,
            bib_ids: ids.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn year_month_text() {
        let m = YearMonth::new(2016, 9).unwrap();
        assert_eq!(m.to_string(), "2016-09");
        assert_eq!("2016-09".parse::<YearMonth>().unwrap(), m);
        assert!("2016-13".parse::<YearMonth>().is_err());
        assert_eq!(YearMonth::new(2016, 12).unwrap().succ(), YearMonth::new(2017, 1).unwrap());
    }

    #[test]
    fn single_month() {
        let e = vec![at(2017, 3, 1, Module::Catalog, &[]), at(2017, 3, 30, Module::Catalog, &[])];
        assert_eq!(time_series(&e, Module::Catalog, None), vec![(YearMonth::new(2017, 3).unwrap(), 2)]);
        assert!(time_series(&e, Module::Journal, None).is_empty());
    }

    #[test]
    fn study_year_has_twelve_buckets() {
        let e = vec![
            at(2016, 9, 1, Module::Journal, &[]),
            at(2017, 1, 15, Module::Journal, &[]),
            at(2017, 8, 31, Module::Journal, &[]),
        ];
        let s = time_series(&e, Module::Journal, None);
        assert_eq!(s.len(), 12);
        assert_eq!(s[0].0.to_string(), "2016-09");
        assert_eq!(s[11].0.to_string(), "2017-08");
        assert_eq!(s.iter().map(|(_, n)| n).sum::<u64>(), 3);
        assert_eq!(s[1].1, 0);

        let w = (YearMonth::new(2016, 10).unwrap(), YearMonth::new(2016, 11).unwrap());
        assert_eq!(
            time_series(&e, Module::Journal, Some(w)),
            vec![(w.0, 0), (w.1, 0)]
        );
    }

    #[test]
    fn trace_counts_entries() {
        let e = vec![
            at(2017, 1, 1, Module::Wayfinder, &["uiu_1"]),
            at(2017, 1, 2, Module::Wayfinder, &["uiu_1", "uiu_2"]),
            at(2017, 1, 3, Module::Display, &["uiu_1"]),
            at(2017, 1, 4, Module::Recommend, &["uiu_2"]),
        ];
        let t = trace_identifier("uiu_1", &e);
        assert_eq!(t[&Module::Wayfinder], 2);
        assert_eq!(t[&Module::Display], 1);
        assert_eq!(t.values().sum::<u64>(), 3);
        assert_eq!(t.len(), Module::ALL.len());
        assert!(trace_identifier("uiu_9", &e).values().all(|&n| n == 0));
    }
}
