//! Load diagnostics shared by the file-backed stores.

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;

/// A problem with one line of an input file. Loading continues past it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub source: String,
    pub line: usize,
    pub message: String,
}

impl Diagnostic {
    pub fn new(source: &str, line: usize, message: impl Into<String>) -> Self {
        Diagnostic {
            source: source.to_string(),
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.source, self.line, self.message)
    }
}

/// A load failure that aborts the whole file.
#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{origin}: no valid entries ({} diagnostics)", diagnostics.len())]
    Empty {
        origin: String,
        diagnostics: Vec<Diagnostic>,
    },
    #[error("{0}")]
    Fatal(Diagnostic),
    #[error("{origin}: {} structural violation(s), first: {}", diagnostics.len(), diagnostics.first().map(|d| d.message.as_str()).unwrap_or(""))]
    Invalid {
        origin: String,
        diagnostics: Vec<Diagnostic>,
    },
    #[error("{origin}: {message}")]
    Format { origin: String, message: String },
}

impl LoadError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        LoadError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// A data row's 1-based line number with its value or error message.
pub type CsvRow<T> = (usize, Result<T, String>);

/// Reads a headed CSV document, checking the header against `expected`.
/// Each data row comes back with its 1-based line number and either the
/// deserialized value or an error message.
pub fn read_csv<T: DeserializeOwned>(
    text: &str,
    origin: &str,
    expected: &[&str],
) -> Result<Vec<CsvRow<T>>, LoadError> {
    let format_err = |message: String| LoadError::Format {
        origin: origin.to_string(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| format_err(e.to_string()))?.clone();
    if header.iter().ne(expected.iter().copied()) {
        return Err(format_err(format!("expected header {}", expected.join(","))));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        match record {
            Ok(record) => {
                let line = record.position().map_or(0, |p| p.line() as usize);
                let value = if record.len() != header.len() {
                    Err(format!("expected {} fields, found {}", header.len(), record.len()))
                } else {
                    record.deserialize(Some(&header)).map_err(|e| e.to_string())
                };
                rows.push((line, value));
            }
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line() as usize);
                rows.push((line, Err(e.to_string())));
            }
        }
    }
    Ok(rows)
}
