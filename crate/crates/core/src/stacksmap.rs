//! Physical shelves bound to call-number ranges.
//!
//! The stack map is the curated table behind the wayfinder: each shelf is
//! an axis-aligned rectangle in map units holding one closed call-number
//! range. Ranges never overlap, so a call number lives on at most one
//! shelf.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::path::Path;

use serde::Deserialize;

use crate::diag::{read_csv, Diagnostic, LoadError};
use crate::geom::{Point, Rect};
use crate::lccn::{CallNumber, CallNumberRange};

#[derive(Debug, Clone, PartialEq)]
pub struct Shelf {
    pub shelf_number: u32,
    pub bounds: Rect,
    pub range: CallNumberRange,
}

impl Shelf {
    /// The wayfinder target point for this shelf.
    pub fn target(&self) -> Point {
        self.bounds.centroid()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StackMap {
    shelves: Vec<Shelf>,
    // indices into `shelves`, ordered by range start
    by_range: Vec<usize>,
    extent: Rect,
    background: Option<String>,
}

#[derive(Debug, Clone)]
pub struct StackMapLoad {
    pub map: StackMap,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Deserialize)]
struct ShelfRow {
    shelf_number: String,
    x_min: String,
    y_min: String,
    x_max: String,
    y_max: String,
    range_start: String,
    range_end: String,
}

pub const STACKMAP_HEADER: [&str; 7] = [
    "shelf_number",
    "x_min",
    "y_min",
    "x_max",
    "y_max",
    "range_start",
    "range_end",
];

impl ShelfRow {
    fn into_shelf(self) -> Result<Shelf, String> {
        let shelf_number: u32 = self
            .shelf_number
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| format!("shelf_number {:?} is not a positive integer", self.shelf_number))?;
        let coord = |name: &str, v: &str| -> Result<f64, String> {
            v.trim()
                .parse::<f64>()
                .map_err(|_| format!("{name} {v:?} is not a number"))
        };
        let bounds = Rect::new(
            coord("x_min", &self.x_min)?,
            coord("y_min", &self.y_min)?,
            coord("x_max", &self.x_max)?,
            coord("y_max", &self.y_max)?,
        )
        .ok_or_else(|| "rectangle must have x_min < x_max and y_min < y_max".to_string())?;
        let start = CallNumber::parse(&self.range_start).map_err(|e| format!("range_start: {e}"))?;
        let end = CallNumber::parse(&self.range_end).map_err(|e| format!("range_end: {e}"))?;
        let range = CallNumberRange::new(start, end).map_err(|e| e.to_string())?;
        Ok(Shelf {
            shelf_number,
            bounds,
            range,
        })
    }
}

fn by_distance_then_number(a: &(&Shelf, f64), b: &(&Shelf, f64)) -> Ordering {
    a.1.total_cmp(&b.1)
        .then_with(|| a.0.shelf_number.cmp(&b.0.shelf_number))
}

impl StackMap {
    /// Validates shelves and builds the range index. The extent defaults to
    /// the bounding box of all shelves.
    ///
    /// Errors list every duplicate shelf number and every pair of
    /// overlapping ranges.
    pub fn new(shelves: Vec<Shelf>, extent: Option<Rect>) -> Result<Self, Vec<String>> {
        let mut problems = Vec::new();
        if shelves.is_empty() {
            problems.push("stack map has no shelves".to_string());
        }
        let mut seen = HashSet::new();
        for s in &shelves {
            if !seen.insert(s.shelf_number) {
                problems.push(format!("duplicate shelf_number {}", s.shelf_number));
            }
        }
        let mut by_range: Vec<usize> = (0..shelves.len()).collect();
        by_range.sort_by(|&a, &b| {
            shelves[a]
                .range
                .start()
                .cmp(shelves[b].range.start())
                .then_with(|| shelves[a].shelf_number.cmp(&shelves[b].shelf_number))
        });
        for pair in by_range.windows(2) {
            let (a, b) = (&shelves[pair[0]], &shelves[pair[1]]);
            if a.range.intersects(&b.range) {
                problems.push(format!(
                    "shelves {} and {} have overlapping ranges ({} / {})",
                    a.shelf_number, b.shelf_number, a.range, b.range
                ));
            }
        }
        if !problems.is_empty() {
            return Err(problems);
        }
        let extent = extent.unwrap_or_else(|| {
            shelves
                .iter()
                .map(|s| s.bounds)
                .reduce(|a, b| a.union(&b))
                .expect("non-empty")
        });
        Ok(StackMap {
            shelves,
            by_range,
            extent,
            background: None,
        })
    }

    /// Reads the stack map CSV. Malformed records are reported and skipped;
    /// duplicate shelf numbers and overlapping ranges abort the load.
    pub fn load(path: impl AsRef<Path>) -> Result<StackMapLoad, LoadError> {
        let path = path.as_ref();
        let source = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| LoadError::io(path, e))?;
        Self::parse_csv(&text, &source, None)
    }

    pub fn parse_csv(text: &str, source: &str, extent: Option<Rect>) -> Result<StackMapLoad, LoadError> {
        let mut diagnostics = Vec::new();
        let mut shelves = Vec::new();
        for (line, row) in read_csv::<ShelfRow>(text, source, &STACKMAP_HEADER)? {
            match row.and_then(ShelfRow::into_shelf) {
                Ok(shelf) => shelves.push(shelf),
                Err(msg) => diagnostics.push(Diagnostic::new(source, line, msg)),
            }
        }
        if shelves.is_empty() {
            return Err(LoadError::Empty {
                origin: source.to_string(),
                diagnostics,
            });
        }
        let map = StackMap::new(shelves, extent).map_err(|problems| LoadError::Invalid {
            origin: source.to_string(),
            diagnostics: problems
                .into_iter()
                .map(|m| Diagnostic::new(source, 0, m))
                .collect(),
        })?;
        Ok(StackMapLoad { map, diagnostics })
    }

    pub fn with_background(mut self, image: impl Into<String>) -> Self {
        self.background = Some(image.into());
        self
    }

    pub fn shelves(&self) -> &[Shelf] {
        &self.shelves
    }

    pub fn len(&self) -> usize {
        self.shelves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shelves.is_empty()
    }

    pub fn extent(&self) -> Rect {
        self.extent
    }

    pub fn background(&self) -> Option<&str> {
        self.background.as_deref()
    }

    pub fn shelf(&self, shelf_number: u32) -> Option<&Shelf> {
        self.shelves.iter().find(|s| s.shelf_number == shelf_number)
    }

    /// Median of each shelf's shorter side.
    pub fn typical_shelf_width(&self) -> f64 {
        let mut widths: Vec<f64> = self
            .shelves
            .iter()
            .map(|s| s.bounds.width().min(s.bounds.height()))
            .collect();
        widths.sort_by(f64::total_cmp);
        let n = widths.len();
        if n % 2 == 1 {
            widths[n / 2]
        } else {
            (widths[n / 2 - 1] + widths[n / 2]) / 2.0
        }
    }

    /// 1.5 shelf widths: reaches the stacks on either side of an aisle.
    pub fn default_radius(&self) -> f64 {
        1.5 * self.typical_shelf_width()
    }

    /// The shelf whose range holds `cn`, if any.
    pub fn shelf_for_call(&self, cn: &CallNumber) -> Option<&Shelf> {
        let idx = self
            .by_range
            .partition_point(|&i| self.shelves[i].range.start() <= cn);
        let shelf = &self.shelves[self.by_range[idx.checked_sub(1)?]];
        shelf.range.contains(cn).then_some(shelf)
    }

    /// Shelves within `radius` of `p`, nearest first, ties by shelf number.
    pub fn shelves_within(&self, p: Point, radius: f64) -> Vec<(&Shelf, f64)> {
        let mut hits: Vec<(&Shelf, f64)> = self
            .shelves
            .iter()
            .map(|s| (s, s.bounds.distance_to(&p)))
            .filter(|(_, d)| *d <= radius)
            .collect();
        hits.sort_by(by_distance_then_number);
        hits
    }

    pub fn ranges_for_location(&self, p: Point, radius: f64) -> Vec<CallNumberRange> {
        self.shelves_within(p, radius)
            .into_iter()
            .map(|(s, _)| s.range.clone())
            .collect()
    }

    /// The `k` closest shelves; fewer when the map is smaller than `k`.
    pub fn nearest_shelves(&self, p: Point, k: usize) -> Vec<&Shelf> {
        let mut all: Vec<(&Shelf, f64)> = self
            .shelves
            .iter()
            .map(|s| (s, s.bounds.distance_to(&p)))
            .collect();
        all.sort_by(by_distance_then_number);
        all.into_iter().take(k).map(|(s, _)| s).collect()
    }
}
