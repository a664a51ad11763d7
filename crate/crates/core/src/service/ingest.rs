//! Corpus ingestion: one JSON document per line, `{"id","language","text"}`.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Engine;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusDoc {
    pub id: String,
    pub language: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestFailure {
    pub line: usize,
    pub id: Option<String>,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    /// Documents extracted and indexed.
    pub docs: usize,
    pub events: usize,
    pub failures: usize,
    pub errors: Vec<IngestFailure>,
}

/// Extract every document of `src` and index the successes in corpus
/// order. A malformed line or a failed extraction is recorded and skipped.
pub fn ingest_jsonl(engine: &Engine, src: &str) -> Result<IngestReport> {
    let lines: Vec<(usize, &str)> = src
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| (n + 1, l))
        .collect();
    let outcomes: Vec<_> = lines
        .par_iter()
        .map(|&(line, text)| {
            let doc: CorpusDoc = serde_json::from_str(text).map_err(|e| IngestFailure {
                line,
                id: None,
                error: e.to_string(),
            })?;
            engine
                .process(&doc.id, &doc.language, &doc.text)
                .map_err(|e| IngestFailure {
                    line,
                    id: Some(doc.id.clone()),
                    error: e.to_string(),
                })
        })
        .collect();

    let mut report = IngestReport::default();
    let mut records = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => {
                report.docs += 1;
                report.events += r.events.len();
                records.push(r);
            }
            Err(f) => {
                tracing::warn!(line = f.line, id = ?f.id, error = %f.error, "document skipped");
                report.failures += 1;
                report.errors.push(f);
            }
        }
    }
    engine.index.insert_many(records)?;
    Ok(report)
}

/// As [`ingest_jsonl`]; an unreadable file is an error.
pub fn ingest_file(engine: &Engine, path: &Path) -> Result<IngestReport> {
    let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ingest_jsonl(engine, &src)
}
