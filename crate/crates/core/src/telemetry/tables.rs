use std::collections::{BTreeSet, HashMap};
use std::io::{self, Write};

use super::annotate::AnnotatedEntry;
use crate::log::Module;

/// Wayfinder hits aggregated per uri.
#[derive(Debug, Clone, PartialEq)]
pub struct WayfinderRow {
    pub uri: String,
    pub sum_records: u64,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub shelf_number: Option<u32>,
    pub call_number: String,
}

/// One recommendation request and the ids it returned, in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecommendRow {
    pub uri: String,
    pub bib_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SubjectRow {
    pub call_number: String,
    pub subject: String,
}

pub const MIN_BIB_COLUMNS: usize = 5;

/// Successful wayfinder requests grouped by uri, most frequent first and
/// then by uri.
pub fn wayfinder_table(annotated: &[AnnotatedEntry]) -> Vec<WayfinderRow> {
    let mut rows: Vec<WayfinderRow> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for a in annotated
        .iter()
        .filter(|a| a.entry.module == Module::Wayfinder && a.entry.is_success())
    {
        match index.get(a.entry.uri.as_str()) {
            Some(&i) => rows[i].sum_records += 1,
            None => {
                index.insert(&a.entry.uri, rows.len());
                rows.push(WayfinderRow {
                    uri: a.entry.uri.clone(),
                    sum_records: 1,
                    x: a.position.map(|p| p.x),
                    y: a.position.map(|p| p.y),
                    shelf_number: a.shelf_number,
                    call_number: a
                        .annotations
                        .first()
                        .map_or_else(|| "unknown".to_string(), |b| b.call_number_or_unknown()),
                });
            }
        }
    }
    rows.sort_by(|a, b| b.sum_records.cmp(&a.sum_records).then_with(|| a.uri.cmp(&b.uri)));
    rows
}

/// Successful recommendation requests in log order.
pub fn recommend_table(annotated: &[AnnotatedEntry]) -> Vec<RecommendRow> {
    annotated
        .iter()
        .filter(|a| a.entry.module == Module::Recommend && a.entry.is_success())
        .map(|a| RecommendRow {
            uri: a.entry.uri.clone(),
            bib_ids: a.entry.bib_ids.clone(),
        })
        .collect()
}

/// Distinct recommended call numbers with their subject, in call-number
/// order. Ids missing from the catalog are left out.
pub fn subject_table(annotated: &[AnnotatedEntry]) -> Vec<SubjectRow> {
    let mut seen = BTreeSet::new();
    for a in annotated
        .iter()
        .filter(|a| a.entry.module == Module::Recommend && a.entry.is_success())
    {
        for b in &a.annotations {
            if let Some(cn) = &b.call_number {
                seen.insert((cn.clone(), b.subject_or_unknown().to_string()));
            }
        }
    }
    seen.into_iter()
        .map(|(cn, subject)| SubjectRow {
            call_number: cn.canonical(),
            subject,
        })
        .collect()
}

fn coord(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{}", v.round()))
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().flexible(true).from_writer(w)
}

fn into_io(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

pub fn write_wayfinder_csv<W: Write>(rows: &[WayfinderRow], w: W) -> io::Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["uri", "sum-records", "X", "Y", "shelf-number", "call-number"])
        .map_err(into_io)?;
    for r in rows {
        out.write_record([
            r.uri.clone(),
            r.sum_records.to_string(),
            coord(r.x),
            coord(r.y),
            r.shelf_number.map(|n| n.to_string()).unwrap_or_default(),
            r.call_number.clone(),
        ])
        .map_err(into_io)?;
    }
    out.flush()
}

/// Header and rows padded to at least five `bib-id` columns.
pub fn write_recommend_csv<W: Write>(rows: &[RecommendRow], w: W) -> io::Result<()> {
    let columns = rows.iter().map(|r| r.bib_ids.len()).max().unwrap_or(0).max(MIN_BIB_COLUMNS);
    let mut out = csv_writer(w);
    let mut header = vec!["uri"];
    header.extend(std::iter::repeat_n("bib-id", columns));
    out.write_record(&header).map_err(into_io)?;
    for r in rows {
        let mut record = vec![r.uri.as_str()];
        record.extend(r.bib_ids.iter().map(String::as_str));
        record.resize(columns + 1, "");
        out.write_record(&record).map_err(into_io)?;
    }
    out.flush()
}

pub fn write_subject_csv<W: Write>(rows: &[SubjectRow], w: W) -> io::Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["call-number", "subject"]).map_err(into_io)?;
    for r in rows {
        out.write_record([&r.call_number, &r.subject]).map_err(into_io)?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;
    use crate::lccn::CallNumber;
    use crate::log::ApiLogEntry;
    use crate::telemetry::BibAnnotation;
    use chrono::{TimeZone, Utc};

    fn ann(module: Module, uri: &str, status: u16, ids: &[(&str, Option<&str>, Option<&str>)]) -> AnnotatedEntry {
        AnnotatedEntry {
            entry: ApiLogEntry {
                timestamp: Utc.with_ymd_and_hms(2016, 10, 1, 0, 0, 0).unwrap(),
                module,
                uri: uri.into(),
                params: Default::default(),
                status,
                bib_ids: ids.iter().map(|(id, _, _)| id.to_string()).collect(),
            },
            annotations: ids
                .iter()
                .map(|(id, cn, subj)| BibAnnotation {
                    bib_id: id.to_string(),
                    call_number: cn.map(|c| CallNumber::parse(c).unwrap()),
                    subject: subj.map(str::to_string),
                })
                .collect(),
            position: None,
            shelf_number: None,
        }
    }

    #[test]
    fn wayfinder_rows_mirror_the_sample_shape() {
        let uri = "/api/wayfinder/map_data/uiu_undergrad/uiu_8127460";
        let mut hits: Vec<AnnotatedEntry> = (0..14)
            .map(|_| {
                let mut a = ann(Module::Wayfinder, uri, 200, &[("uiu_8127460", Some("PN1995 .C655 2015"), None)]);
                a.position = Some(Point::new(337.0, 128.0));
                a.shelf_number = Some(30);
                a
            })
            .collect();
        hits.push(ann(Module::Wayfinder, "/api/wayfinder/map_data/uiu_undergrad/uiu_0", 404, &[]));
        let rows = wayfinder_table(&hits);
        assert_eq!(rows.len(), 1);
        let mut buf = Vec::new();
        write_wayfinder_csv(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "uri,sum-records,X,Y,shelf-number,call-number\n\
             /api/wayfinder/map_data/uiu_undergrad/uiu_8127460,14,337,128,30,PN1995 .C655 2015\n"
        );
    }

    #[test]
    fn recommend_rows_pad_to_five() {
        let rows = recommend_table(&[
            ann(Module::Recommend, "/api/recommend/popularnear?x=1&y=2", 200, &[("uiu_1", None, None), ("hat_2", None, None)]),
            ann(Module::Recommend, "/api/recommend/popularnear?x=a", 400, &[]),
        ]);
        let mut buf = Vec::new();
        write_recommend_csv(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "uri,bib-id,bib-id,bib-id,bib-id,bib-id\n/api/recommend/popularnear?x=1&y=2,uiu_1,hat_2,,,\n"
        );
    }

    #[test]
    fn subject_rows_are_distinct_and_ordered() {
        let rows = subject_table(&[
            ann(
                Module::Recommend,
                "/r",
                200,
                &[
                    ("uiu_2", Some("PS3545 .I345"), None),
                    ("uiu_1", Some("B105.E9 G63 1974"), Some("Philosophy (General)")),
                    ("uiu_9", None, None),
                ],
            ),
            ann(Module::Recommend, "/r", 200, &[("uiu_1", Some("B105.E9 G63 1974"), Some("Philosophy (General)"))]),
        ]);
        let mut buf = Vec::new();
        write_subject_csv(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "call-number,subject\nB105 .E9 G63 1974,Philosophy (General)\nPS3545 .I345,unknown\n"
        );
    }
}
