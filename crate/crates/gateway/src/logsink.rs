use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use biblio_core::log::ApiLogEntry;

/// Append-only JSON Lines transaction log.
///
/// Each entry is written as one buffer under a lock, so concurrent
/// handlers never interleave partial lines. Write failures are counted and
/// reported through tracing; they never fail the request.
#[derive(Debug)]
pub struct LogSink {
    file: Option<Mutex<File>>,
    path: Option<PathBuf>,
    written: AtomicU64,
    errors: AtomicU64,
}

impl LogSink {
    pub fn open(path: impl AsRef<Path>) -> io::Result<Self> {
        let path = path.as_ref();
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(LogSink {
            file: Some(Mutex::new(file)),
            path: Some(path.to_path_buf()),
            written: AtomicU64::new(0),
            errors: AtomicU64::new(0),
        })
    }

    /// A sink that drops every entry.
    pub fn disabled() -> Self {
        LogSink {
            file: None,
            path: None,
            written: AtomicU64::new(0),
            errors: AtomicU64::new(0),
        }
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn append(&self, entry: &ApiLogEntry) {
        let Some(file) = &self.file else {
            return;
        };
        let mut line = entry.to_line();
        line.push('\n');
        let result = match file.lock() {
            Ok(mut f) => f.write_all(line.as_bytes()).and_then(|_| f.flush()),
            Err(_) => Err(io::Error::other("log sink lock poisoned")),
        };
        match result {
            Ok(()) => {
                self.written.fetch_add(1, Ordering::Relaxed);
            }
            Err(e) => {
                self.errors.fetch_add(1, Ordering::Relaxed);
                tracing::error!(error = %e, "failed to append transaction log entry");
            }
        }
    }

    pub fn written(&self) -> u64 {
        self.written.load(Ordering::Relaxed)
    }

    pub fn errors(&self) -> u64 {
        self.errors.load(Ordering::Relaxed)
    }
}
