//! Library of Congress call numbers.
//!
//! A call number is parsed into its class letters, class number, cutters,
//! optional year and an uninterpreted suffix (volume or copy designators).
//! [`CallNumber`] implements [`Ord`] with shelf-list filing order, and
//! [`ClassificationOutline`] maps call-number ranges to subject labels.

use std::cmp::Ordering;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::diag::{Diagnostic, LoadError};

/// Reason a call number failed to parse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    NoClassLetters,
    TooManyClassLetters,
    MissingClassNumber,
    ClassNumberOverflow,
    MalformedCutter,
    TrailingGarbage,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ParseErrorKind::Empty => "empty call number",
            ParseErrorKind::NoClassLetters => "no class letters",
            ParseErrorKind::TooManyClassLetters => "more than three class letters",
            ParseErrorKind::MissingClassNumber => "missing class number",
            ParseErrorKind::ClassNumberOverflow => "class number too large",
            ParseErrorKind::MalformedCutter => "malformed cutter",
            ParseErrorKind::TrailingGarbage => "trailing garbage",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

/// Whether unrecognised trailing tokens are kept as a suffix or rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    #[default]
    Lenient,
    Strict,
}

/// Decimal class number, e.g. `1469.62`. The fraction is stored without
/// trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassNumber {
    integer: u64,
    fraction: String,
}

impl ClassNumber {
    pub fn new(integer: u64, fraction: &str) -> Option<Self> {
        if !fraction.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        Some(ClassNumber {
            integer,
            fraction: fraction.trim_end_matches('0').to_string(),
        })
    }

    pub fn integer(&self) -> u64 {
        self.integer
    }

    /// Fractional digits after the decimal point; empty for whole numbers.
    pub fn fraction(&self) -> &str {
        &self.fraction
    }

    pub fn as_f64(&self) -> f64 {
        format!("{self}").parse().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for ClassNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.fraction.is_empty() {
            write!(f, "{}", self.integer)
        } else {
            write!(f, "{}.{}", self.integer, self.fraction)
        }
    }
}

impl Ord for ClassNumber {
    fn cmp(&self, other: &Self) -> Ordering {
        self.integer
            .cmp(&other.integer)
            .then_with(|| cmp_decimal_fraction(&self.fraction, &other.fraction))
    }
}

impl PartialOrd for ClassNumber {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A cutter: one letter followed by digits read as the fraction `0.digits`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cutter {
    letter: char,
    digits: String,
}

impl Cutter {
    /// Returns `None` unless `letter` is an uppercase ASCII letter and
    /// `digits` is a non-empty, not-all-zero digit string.
    pub fn new(letter: char, digits: &str) -> Option<Self> {
        let ok = letter.is_ascii_uppercase()
            && !digits.is_empty()
            && digits.bytes().all(|b| b.is_ascii_digit())
            && digits.bytes().any(|b| b != b'0');
        ok.then(|| Cutter {
            letter,
            digits: digits.to_string(),
        })
    }

    pub fn letter(&self) -> char {
        self.letter
    }

    pub fn digits(&self) -> &str {
        &self.digits
    }
}

impl fmt::Display for Cutter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.letter, self.digits)
    }
}

impl Ord for Cutter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.letter
            .cmp(&other.letter)
            .then_with(|| cmp_decimal_fraction(&self.digits, &other.digits))
    }
}

impl PartialOrd for Cutter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Compares two digit strings as decimal fractions. Numerically equal
/// strings (`65` and `650`) fall back to length so that the order stays
/// consistent with equality.
fn cmp_decimal_fraction(a: &str, b: &str) -> Ordering {
    let (a, b) = (a.as_bytes(), b.as_bytes());
    let n = a.len().max(b.len());
    for i in 0..n {
        let da = a.get(i).copied().unwrap_or(b'0');
        let db = b.get(i).copied().unwrap_or(b'0');
        match da.cmp(&db) {
            Ordering::Equal => {}
            ord => return ord,
        }
    }
    a.len().cmp(&b.len())
}

/// A parsed Library of Congress call number.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CallNumber {
    class_letters: String,
    class_number: ClassNumber,
    cutters: Vec<Cutter>,
    year: Option<u16>,
    suffix: Option<String>,
}

impl CallNumber {
    pub fn new(
        class_letters: &str,
        class_number: ClassNumber,
        cutters: Vec<Cutter>,
        year: Option<u16>,
        suffix: Option<&str>,
    ) -> Option<Self> {
        let letters_ok = (1..=3).contains(&class_letters.len())
            && class_letters.bytes().all(|b| b.is_ascii_uppercase());
        if !letters_ok {
            return None;
        }
        let suffix = suffix
            .map(|s| s.split_whitespace().collect::<Vec<_>>().join(" "))
            .filter(|s| !s.is_empty());
        Some(CallNumber {
            class_letters: class_letters.to_string(),
            class_number,
            cutters,
            year,
            suffix,
        })
    }

    /// Parses leniently: unrecognised trailing tokens become the suffix.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Parser::new(text).parse(ParseMode::Lenient)
    }

    pub fn parse_with(text: &str, mode: ParseMode) -> Result<Self, ParseError> {
        Parser::new(text).parse(mode)
    }

    pub fn class_letters(&self) -> &str {
        &self.class_letters
    }

    pub fn class_number(&self) -> &ClassNumber {
        &self.class_number
    }

    pub fn cutters(&self) -> &[Cutter] {
        &self.cutters
    }

    pub fn year(&self) -> Option<u16> {
        self.year
    }

    pub fn suffix(&self) -> Option<&str> {
        self.suffix.as_deref()
    }

    /// `LETTERS NUMBER .C1 C2 YEAR SUFFIX`, single spaces, dot only before the
    /// first cutter.
    pub fn canonical(&self) -> String {
        self.to_string()
    }

    /// True when `self`, used as an inclusive upper bound, names a prefix of
    /// `other`: `B5802` admits `B5802.5` and `B5802 .A1 1990`, and
    /// `GV1469.62` admits `GV1469.62 .D84`.
    pub fn is_prefix_of(&self, other: &CallNumber) -> bool {
        if self.year.is_some() || self.suffix.is_some() {
            return self == other;
        }
        if self.class_letters != other.class_letters
            || self.class_number.integer != other.class_number.integer
        {
            return false;
        }
        if self.cutters.is_empty() {
            other.class_number.fraction.starts_with(&self.class_number.fraction)
        } else {
            self.class_number.fraction == other.class_number.fraction
                && other.cutters.starts_with(&self.cutters)
        }
    }
}

impl fmt::Display for CallNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.class_letters, self.class_number)?;
        for (i, cutter) in self.cutters.iter().enumerate() {
            if i == 0 {
                write!(f, " .{cutter}")?;
            } else {
                write!(f, " {cutter}")?;
            }
        }
        if let Some(year) = self.year {
            write!(f, " {year}")?;
        }
        if let Some(suffix) = &self.suffix {
            write!(f, " {suffix}")?;
        }
        Ok(())
    }
}

impl FromStr for CallNumber {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CallNumber::parse(s)
    }
}

impl Ord for CallNumber {
    fn cmp(&self, other: &Self) -> Ordering {
        self.class_letters
            .cmp(&other.class_letters)
            .then_with(|| self.class_number.cmp(&other.class_number))
            // Vec's lexicographic order sorts a strict prefix first.
            .then_with(|| self.cutters.cmp(&other.cutters))
            .then_with(|| self.year.cmp(&other.year))
            .then_with(|| self.suffix.cmp(&other.suffix))
    }
}

impl PartialOrd for CallNumber {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Serialize for CallNumber {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CallNumber {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        CallNumber::parse(&s).map_err(serde::de::Error::custom)
    }
}

struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            text,
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<u8> {
        self.bytes.get(self.pos + offset).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn take_while(&mut self, pred: impl Fn(u8) -> bool) -> &'a str {
        let start = self.pos;
        while self.peek().is_some_and(&pred) {
            self.pos += 1;
        }
        &self.text[start..self.pos]
    }

    fn err(&self, offset: usize, kind: ParseErrorKind) -> ParseError {
        ParseError { offset, kind }
    }

    fn at_token_end(&self) -> bool {
        match self.peek() {
            None => true,
            Some(b) => b.is_ascii_whitespace() || b == b'.',
        }
    }

    fn parse(mut self, mode: ParseMode) -> Result<CallNumber, ParseError> {
        self.skip_ws();
        if self.peek().is_none() {
            return Err(self.err(self.pos, ParseErrorKind::Empty));
        }

        let letters_at = self.pos;
        let letters = self.take_while(|b| b.is_ascii_uppercase());
        if letters.is_empty() {
            return Err(self.err(letters_at, ParseErrorKind::NoClassLetters));
        }
        if letters.len() > 3 {
            return Err(self.err(letters_at, ParseErrorKind::TooManyClassLetters));
        }

        self.skip_ws();
        let number_at = self.pos;
        let integer = self.take_while(|b| b.is_ascii_digit());
        if integer.is_empty() {
            return Err(self.err(number_at, ParseErrorKind::MissingClassNumber));
        }
        let integer: u64 = integer
            .parse()
            .map_err(|_| self.err(number_at, ParseErrorKind::ClassNumberOverflow))?;
        let mut fraction = "";
        if self.peek() == Some(b'.') && self.peek_at(1).is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
            fraction = self.take_while(|b| b.is_ascii_digit());
        }
        let class_number = ClassNumber::new(integer, fraction).expect("digits only");

        let mut cutters = Vec::new();
        loop {
            let save = self.pos;
            self.skip_ws();
            let had_dot = self.peek() == Some(b'.');
            if had_dot {
                self.pos += 1;
                self.skip_ws();
            }
            let cutter_at = self.pos;
            match self.peek() {
                Some(b) if b.is_ascii_uppercase() => {
                    self.pos += 1;
                    let digits = self.take_while(|b| b.is_ascii_digit());
                    if digits.is_empty() || !self.at_token_end() {
                        if had_dot {
                            return Err(self.err(cutter_at, ParseErrorKind::MalformedCutter));
                        }
                        self.pos = save;
                        break;
                    }
                    let cutter = Cutter::new(b as char, digits)
                        .ok_or_else(|| self.err(cutter_at, ParseErrorKind::MalformedCutter))?;
                    cutters.push(cutter);
                }
                _ if had_dot => {
                    return Err(self.err(cutter_at, ParseErrorKind::MalformedCutter));
                }
                _ => {
                    self.pos = save;
                    break;
                }
            }
        }

        let save = self.pos;
        self.skip_ws();
        let year_text = self.take_while(|b| b.is_ascii_digit());
        let year = if year_text.len() == 4
            && self.peek().is_none_or(|b| b.is_ascii_whitespace())
        {
            year_text.parse::<u16>().ok()
        } else {
            self.pos = save;
            None
        };

        self.skip_ws();
        let rest_at = self.pos;
        let rest = self.text[rest_at..].trim();
        if !rest.is_empty() && mode == ParseMode::Strict {
            return Err(self.err(rest_at, ParseErrorKind::TrailingGarbage));
        }

        Ok(CallNumber::new(letters, class_number, cutters, year, Some(rest))
            .expect("letters validated above"))
    }
}

/// Closed interval of call numbers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CallNumberRange {
    start: CallNumber,
    end: CallNumber,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("range start {start} sorts after end {end}")]
pub struct InvertedRange {
    pub start: String,
    pub end: String,
}

impl CallNumberRange {
    pub fn new(start: CallNumber, end: CallNumber) -> Result<Self, InvertedRange> {
        if start > end {
            return Err(InvertedRange {
                start: start.to_string(),
                end: end.to_string(),
            });
        }
        Ok(CallNumberRange { start, end })
    }

    pub fn start(&self) -> &CallNumber {
        &self.start
    }

    pub fn end(&self) -> &CallNumber {
        &self.end
    }

    /// Closed-interval membership in filing order.
    pub fn contains(&self, cn: &CallNumber) -> bool {
        self.start <= *cn && *cn <= self.end
    }

    /// Like [`contains`](Self::contains), but an end bound also admits every
    /// call number it is a prefix of (outline semantics).
    pub fn covers(&self, cn: &CallNumber) -> bool {
        self.start <= *cn && (*cn <= self.end || self.end.is_prefix_of(cn))
    }

    pub fn intersects(&self, other: &CallNumberRange) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

impl fmt::Display for CallNumberRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} - {}", self.start, self.end)
    }
}

/// `compare(a, b)` in filing order.
pub fn compare(a: &CallNumber, b: &CallNumber) -> Ordering {
    a.cmp(b)
}

pub fn in_range(cn: &CallNumber, range: &CallNumberRange) -> bool {
    range.contains(cn)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutlineEntry {
    pub range: CallNumberRange,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no outline range contains {0}")]
pub struct Unclassified(pub String);

/// The LC outline subset shipped with the crate, in the TSV format read by
/// [`ClassificationOutline::parse_tsv`].
pub const BUNDLED_OUTLINE: &str = include_str!("../data/lc_outline.tsv");

/// Subject outline: call-number ranges with labels. Where ranges nest, the
/// narrowest containing range wins.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClassificationOutline {
    entries: Vec<OutlineEntry>,
}

#[derive(Debug, Clone, Default)]
pub struct OutlineLoad {
    pub outline: ClassificationOutline,
    pub diagnostics: Vec<Diagnostic>,
    pub warnings: Vec<Diagnostic>,
}

impl ClassificationOutline {
    pub fn new(entries: Vec<OutlineEntry>) -> Self {
        ClassificationOutline { entries }
    }

    pub fn entries(&self) -> &[OutlineEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Reads a tab-separated outline file (`START<TAB>END<TAB>LABEL`).
    pub fn load(path: impl AsRef<Path>) -> Result<OutlineLoad, LoadError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| LoadError::io(path, e))?;
        Self::parse_tsv(&text, &path.display().to_string())
    }

    pub fn parse_tsv(text: &str, source: &str) -> Result<OutlineLoad, LoadError> {
        let mut load = OutlineLoad::default();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                load.diagnostics.push(Diagnostic::new(
                    source,
                    line_no,
                    format!("expected 3 tab-separated fields, found {}", fields.len()),
                ));
                continue;
            }
            let parsed = CallNumber::parse(fields[0].trim())
                .map_err(|e| format!("start: {e}"))
                .and_then(|s| {
                    CallNumber::parse(fields[1].trim())
                        .map(|e| (s, e))
                        .map_err(|e| format!("end: {e}"))
                })
                .and_then(|(s, e)| CallNumberRange::new(s, e).map_err(|e| e.to_string()));
            let label = fields[2].trim();
            match parsed {
                Ok(_) if label.is_empty() => {
                    load.diagnostics
                        .push(Diagnostic::new(source, line_no, "empty label"));
                }
                Ok(range) => {
                    if let Some(prev) = load.outline.entries.iter().find(|e| e.range == range) {
                        load.warnings.push(Diagnostic::new(
                            source,
                            line_no,
                            format!("range {range} already labelled {:?}; keeping first", prev.label),
                        ));
                    }
                    load.outline.entries.push(OutlineEntry {
                        range,
                        label: label.to_string(),
                    });
                }
                Err(msg) => load.diagnostics.push(Diagnostic::new(source, line_no, msg)),
            }
        }
        if load.outline.entries.is_empty() {
            return Err(LoadError::Empty {
                origin: source.to_string(),
                diagnostics: load.diagnostics,
            });
        }
        Ok(load)
    }

    /// Label of the narrowest entry covering `cn`.
    ///
    /// Candidates are ranked by latest start, then earliest end, then file
    /// order, which picks the innermost of any nested ranges.
    pub fn classify(&self, cn: &CallNumber) -> Result<&str, Unclassified> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.range.covers(cn))
            .min_by(|(ia, a), (ib, b)| {
                b.range
                    .start
                    .cmp(&a.range.start)
                    .then_with(|| a.range.end.cmp(&b.range.end))
                    .then_with(|| ia.cmp(ib))
            })
            .map(|(_, e)| e.label.as_str())
            .ok_or_else(|| Unclassified(cn.to_string()))
    }
}

pub fn classify<'o>(
    cn: &CallNumber,
    outline: &'o ClassificationOutline,
) -> Result<&'o str, Unclassified> {
    outline.classify(cn)
}
