use std::path::Path;

use crate::diag::{Diagnostic, LoadError};
use crate::log::ApiLogEntry;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedLogs {
    /// Ordered by timestamp, then file, then line.
    pub entries: Vec<ApiLogEntry>,
    /// Lines that failed to parse; they are reported, not dropped silently.
    pub malformed: Vec<Diagnostic>,
}

/// Parses one log document. Blank lines are skipped.
pub fn parse_log_text(text: &str, source: &str) -> ParsedLogs {
    let mut out = ParsedLogs::default();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match ApiLogEntry::from_line(line) {
            Ok(e) => out.entries.push(e),
            Err(err) => out.malformed.push(Diagnostic::new(source, idx + 1, err.to_string())),
        }
    }
    out
}

/// Reads and merges several log files. An unreadable file aborts.
pub fn parse_logs<P: AsRef<Path>>(paths: &[P]) -> Result<ParsedLogs, LoadError> {
    let mut out = ParsedLogs::default();
    for path in paths {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| LoadError::io(path, e))?;
        let parsed = parse_log_text(&text, &path.display().to_string());
        out.entries.extend(parsed.entries);
        out.malformed.extend(parsed.malformed);
    }
    // stable: equal timestamps keep file/line order
    out.entries.sort_by_key(|e| e.timestamp);
    Ok(out)
}
