//! Persistent event index: an append-only JSON Lines record log replayed
//! into memory on open.
//!
//! The first line is the header `{"format":"evsearch-index","version":1}`.
//! Every following line is one [`DocRecord`]. A later record for the same
//! document id replaces the earlier one, so re-ingesting a document never
//! duplicates its events.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};

use super::IndexedEvent;
use crate::error::{Error, Result};
use crate::schema::ExtractionResult;

pub const INDEX_FORMAT: &str = "evsearch-index";
pub const INDEX_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocRecord {
    pub extraction: ExtractionResult,
    pub events: Vec<IndexedEvent>,
}

impl DocRecord {
    pub fn doc_id(&self) -> &str {
        &self.extraction.document.id
    }
}

/// An immutable view of the index.
#[derive(Debug, Clone, Default)]
pub struct IndexSnapshot {
    docs: BTreeMap<String, Arc<DocRecord>>,
}

impl IndexSnapshot {
    pub fn document(&self, id: &str) -> Option<&DocRecord> {
        self.docs.get(id).map(Arc::as_ref)
    }

    pub fn documents(&self) -> impl Iterator<Item = &DocRecord> {
        self.docs.values().map(Arc::as_ref)
    }

    pub fn events(&self) -> impl Iterator<Item = &IndexedEvent> {
        self.docs.values().flat_map(|d| d.events.iter())
    }

    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    pub fn event_count(&self) -> usize {
        self.docs.values().map(|d| d.events.len()).sum()
    }
}

/// Concurrent readers share published snapshots; writes go through one
/// writer lock, append to the log, then publish a new snapshot.
#[derive(Debug)]
pub struct EventIndex {
    current: RwLock<Arc<IndexSnapshot>>,
    log: Mutex<Option<(PathBuf, File)>>,
}

impl EventIndex {
    pub fn in_memory() -> Self {
        EventIndex {
            current: RwLock::new(Arc::new(IndexSnapshot::default())),
            log: Mutex::new(None),
        }
    }

    /// Open `path`, creating it with a header if it does not exist.
    pub fn open(path: &Path) -> Result<Self> {
        let mut docs = BTreeMap::new();
        if path.exists() {
            let file = File::open(path).map_err(|e| Error::io(path, e))?;
            let origin = path.display().to_string();
            let mut lines = BufReader::new(file).lines().enumerate();
            match lines.next() {
                None => {}
                Some((_, header)) => {
                    let header = header.map_err(|e| Error::io(path, e))?;
                    let h: Header = serde_json::from_str(&header)
                        .map_err(|e| Error::parse(&origin, 1, format!("bad index header: {e}")))?;
                    if h.format != INDEX_FORMAT || h.version != INDEX_VERSION {
                        return Err(Error::parse(
                            &origin,
                            1,
                            format!("unsupported index format {} v{}", h.format, h.version),
                        ));
                    }
                }
            }
            for (n, line) in lines {
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: DocRecord =
                    serde_json::from_str(&line).map_err(|e| Error::parse(&origin, n + 1, e.to_string()))?;
                docs.insert(rec.doc_id().to_string(), Arc::new(rec));
            }
        }
        let empty = !path.exists() || std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        if empty {
            let header = serde_json::to_string(&Header {
                format: INDEX_FORMAT.into(),
                version: INDEX_VERSION,
            })?;
            writeln!(file, "{header}").map_err(|e| Error::io(path, e))?;
        }
        Ok(EventIndex {
            current: RwLock::new(Arc::new(IndexSnapshot { docs })),
            log: Mutex::new(Some((path.to_path_buf(), file))),
        })
    }

    pub fn snapshot(&self) -> Arc<IndexSnapshot> {
        self.current.read().unwrap_or_else(|p| p.into_inner()).clone()
    }

    pub fn insert(&self, record: DocRecord) -> Result<()> {
        self.insert_many(vec![record])
    }

    /// Append `records` to the log and publish them in one snapshot.
    pub fn insert_many(&self, records: Vec<DocRecord>) -> Result<()> {
        if records.is_empty() {
            return Ok(());
        }
        let mut log = self.log.lock().unwrap_or_else(|p| p.into_inner());
        if let Some((path, file)) = log.as_mut() {
            let mut buf = String::new();
            for r in &records {
                buf.push_str(&serde_json::to_string(r)?);
                buf.push('\n');
            }
            file.write_all(buf.as_bytes())
                .and_then(|_| file.flush())
                .map_err(|e| Error::io(path.as_path(), e))?;
        }
        let mut next = (*self.snapshot()).clone();
        for r in records {
            next.docs.insert(r.doc_id().to_string(), Arc::new(r));
        }
        *self.current.write().unwrap_or_else(|p| p.into_inner()) = Arc::new(next);
        Ok(())
    }

    pub fn path(&self) -> Option<PathBuf> {
        self.log
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .as_ref()
            .map(|(p, _)| p.clone())
    }
}
