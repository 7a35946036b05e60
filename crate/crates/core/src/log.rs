//! The middleware transaction log: one JSON object per line.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

/// The app module a transaction belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Module {
    Wayfinder,
    Recommend,
    Locate,
    Catalog,
    Journal,
    Display,
    Hoot,
    Topicspace,
    Account,
    Citation,
}

impl Module {
    pub const ALL: [Module; 10] = [
        Module::Wayfinder,
        Module::Recommend,
        Module::Locate,
        Module::Catalog,
        Module::Journal,
        Module::Display,
        Module::Hoot,
        Module::Topicspace,
        Module::Account,
        Module::Citation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Module::Wayfinder => "wayfinder",
            Module::Recommend => "recommend",
            Module::Locate => "locate",
            Module::Catalog => "catalog",
            Module::Journal => "journal",
            Module::Display => "display",
            Module::Hoot => "hoot",
            Module::Topicspace => "topicspace",
            Module::Account => "account",
            Module::Citation => "citation",
        }
    }
}

impl fmt::Display for Module {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown module {0:?}")]
pub struct UnknownModule(pub String);

impl FromStr for Module {
    type Err = UnknownModule;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Module::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| UnknownModule(s.to_string()))
    }
}

/// One handled request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiLogEntry {
    pub timestamp: DateTime<Utc>,
    pub module: Module,
    /// Path and query exactly as received.
    pub uri: String,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
    pub status: u16,
    /// Identifiers returned in the response, in response order.
    #[serde(default)]
    pub bib_ids: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum LogLineError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("empty uri")]
    EmptyUri,
    #[error("non-2xx entry carries bib_ids")]
    BibIdsOnError,
}

impl ApiLogEntry {
    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }

    /// Serializes to a single JSON line without the trailing newline.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("log entries always serialize")
    }

    pub fn from_line(line: &str) -> Result<Self, LogLineError> {
        let entry: ApiLogEntry = serde_json::from_str(line)?;
        entry.validate()?;
        Ok(entry)
    }

    pub fn validate(&self) -> Result<(), LogLineError> {
        if self.uri.is_empty() {
            return Err(LogLineError::EmptyUri);
        }
        if !self.is_success() && !self.bib_ids.is_empty() {
            return Err(LogLineError::BibIdsOnError);
        }
        Ok(())
    }
}
