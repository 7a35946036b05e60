use crate::corpus::CorpusStore;
use crate::geom::Point;
use crate::lccn::{CallNumber, ClassificationOutline};
use crate::log::{ApiLogEntry, Module};
use crate::stacksmap::StackMap;

/// One bibliographic id joined to its call number and subject. Either may
/// be missing: the id can be absent from the catalog, or its call number
/// outside the outline.
#[derive(Debug, Clone, PartialEq)]
pub struct BibAnnotation {
    pub bib_id: String,
    pub call_number: Option<CallNumber>,
    pub subject: Option<String>,
}

impl BibAnnotation {
    pub fn subject_or_unknown(&self) -> &str {
        self.subject.as_deref().unwrap_or("unknown")
    }

    pub fn call_number_or_unknown(&self) -> String {
        self.call_number
            .as_ref()
            .map_or_else(|| "unknown".to_string(), |c| c.canonical())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedEntry {
    pub entry: ApiLogEntry,
    pub annotations: Vec<BibAnnotation>,
    /// From the request's x/y, or from the shelf target of a wayfinder hit.
    pub position: Option<Point>,
    pub shelf_number: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Annotation {
    pub entries: Vec<AnnotatedEntry>,
    /// Annotations without a subject.
    pub unknown: usize,
}

fn param_point(entry: &ApiLogEntry) -> Option<Point> {
    let x = entry.params.get("x")?.trim().parse::<f64>().ok()?;
    let y = entry.params.get("y")?.trim().parse::<f64>().ok()?;
    (x.is_finite() && y.is_finite()).then_some(Point::new(x, y))
}

/// Joins every logged bib id to the catalog and the outline.
pub fn annotate(
    entries: &[ApiLogEntry],
    corpus: &CorpusStore,
    outline: &ClassificationOutline,
    map: Option<&StackMap>,
) -> Annotation {
    let mut out = Annotation::default();
    for entry in entries {
        let annotations: Vec<BibAnnotation> = entry
            .bib_ids
            .iter()
            .map(|id| {
                let call_number = corpus.get(id).map(|r| r.call_number.clone());
                let subject = call_number
                    .as_ref()
                    .and_then(|c| outline.classify(c).ok())
                    .map(str::to_string);
                BibAnnotation {
                    bib_id: id.clone(),
                    call_number,
                    subject,
                }
            })
            .collect();
        out.unknown += annotations.iter().filter(|a| a.subject.is_none()).count();

        let shelf = match (entry.module, map) {
            (Module::Wayfinder, Some(map)) if entry.is_success() => annotations
                .first()
                .and_then(|a| a.call_number.as_ref())
                .and_then(|c| map.shelf_for_call(c)),
            _ => None,
        };
        let position = param_point(entry).or_else(|| shelf.map(|s| s.target()));
        out.entries.push(AnnotatedEntry {
            entry: entry.clone(),
            annotations,
            position,
            shelf_number: shelf.map(|s| s.shelf_number),
        });
    }
    out
}
