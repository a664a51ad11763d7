//! The extraction output format shared by the CLI, the HTTP API, gold files
//! and the index.
//!
//! One [`ExtractionResult`] per document, serialized as JSON. All offsets
//! are Unicode scalar-value indices relative to the containing sentence's
//! text; add the sentence's `char_base` for document offsets.
//!
//! ```json
//! {
//!   "format": "evsearch-extraction", "version": 1,
//!   "document": {"id": "d1", "language": "en", "text": "..."},
//!   "sentences": [{
//!     "index": 0, "char_base": 0, "text": "...",
//!     "events": [{
//!       "id": "s0.e0", "event_type": "Protest", "anchor_confidence": 0.99,
//!       "anchors": [{"start": 5, "end": 13, "text": "protests"}],
//!       "arguments": [{"role": "agent", "start": 0, "end": 4, "text": "...", "confidence": 0.9}],
//!       "when": null,
//!       "where": {"start": 25, "end": 30, "text": "Hanoi", "confidence": 0.99}
//!     }],
//!     "translation": null
//!   }],
//!   "graph": {"nodes": [...], "edges": [...]},
//!   "providers": {"anchor_scorer": "...", ...},
//!   "translation_status": "done"
//! }
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::{Argument, Attachment, EventGraph, EventMention};
use crate::span::Span;

pub const EXTRACTION_FORMAT: &str = "evsearch-extraction";
pub const EXTRACTION_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanText {
    pub start: usize,
    pub end: usize,
    pub text: String,
}

impl SpanText {
    pub fn new(span: Span, sentence: &str) -> Self {
        SpanText {
            start: span.start(),
            end: span.end(),
            text: span.slice(sentence).to_string(),
        }
    }

    pub fn span(&self) -> Result<Span> {
        Span::new(self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgumentRecord {
    pub role: String,
    pub start: usize,
    pub end: usize,
    pub text: String,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttachmentRecord {
    pub start: usize,
    pub end: usize,
    pub text: String,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub id: String,
    pub event_type: String,
    pub anchor_confidence: f64,
    pub anchors: Vec<SpanText>,
    #[serde(default)]
    pub arguments: Vec<ArgumentRecord>,
    #[serde(default)]
    pub when: Option<AttachmentRecord>,
    #[serde(default, rename = "where")]
    pub where_: Option<AttachmentRecord>,
}

fn attachment(a: Option<Attachment>, text: &str) -> Option<AttachmentRecord> {
    a.map(|a| AttachmentRecord {
        start: a.span.start(),
        end: a.span.end(),
        text: a.span.slice(text).to_string(),
        confidence: a.confidence,
    })
}

impl EventRecord {
    pub fn from_mention(id: String, e: &EventMention, sentence_text: &str) -> Self {
        EventRecord {
            id,
            event_type: e.event_type().to_string(),
            anchor_confidence: e.anchor_confidence(),
            anchors: e.anchors().iter().map(|a| SpanText::new(*a, sentence_text)).collect(),
            arguments: e
                .arguments()
                .iter()
                .map(|a| ArgumentRecord {
                    role: a.role.clone(),
                    start: a.span.start(),
                    end: a.span.end(),
                    text: a.span.slice(sentence_text).to_string(),
                    confidence: a.confidence,
                })
                .collect(),
            when: attachment(e.when(), sentence_text),
            where_: attachment(e.where_(), sentence_text),
        }
    }

    /// Rebuild the validated event. Texts are not re-checked.
    pub fn to_mention(&self, sentence_index: usize) -> Result<EventMention> {
        let anchors = self.anchors.iter().map(SpanText::span).collect::<Result<Vec<_>>>()?;
        let arguments = self
            .arguments
            .iter()
            .map(|a| Argument::new(a.role.clone(), Span::new(a.start, a.end)?, a.confidence))
            .collect::<Result<Vec<_>>>()?;
        let att = |r: &Option<AttachmentRecord>| -> Result<Option<Attachment>> {
            r.as_ref()
                .map(|r| {
                    Ok(Attachment {
                        span: Span::new(r.start, r.end)?,
                        confidence: r.confidence,
                    })
                })
                .transpose()
        };
        EventMention::new(self.event_type.clone(), anchors, self.anchor_confidence, sentence_index)?
            .with_arguments(arguments)?
            .with_when(att(&self.when)?)?
            .with_where(att(&self.where_)?)
    }
}

/// A source span and its image in the English translation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Projection {
    pub event_id: String,
    /// `anchor`, an argument role, `when` or `where`.
    pub element: String,
    pub source: SpanText,
    /// Absent when no source word of the span is aligned.
    pub target: Option<SpanText>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationRecord {
    pub text: String,
    pub projections: Vec<Projection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub index: usize,
    pub char_base: usize,
    pub text: String,
    pub events: Vec<EventRecord>,
    #[serde(default)]
    pub translation: Option<TranslationRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TranslationStatus {
    Pending,
    Done,
    Unavailable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentInfo {
    pub id: String,
    pub language: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionResult {
    pub format: String,
    pub version: u32,
    pub document: DocumentInfo,
    pub sentences: Vec<SentenceRecord>,
    #[serde(default)]
    pub graph: EventGraph,
    #[serde(default)]
    pub providers: BTreeMap<String, String>,
    pub translation_status: TranslationStatus,
}

impl ExtractionResult {
    pub fn check_format(&self) -> Result<()> {
        if self.format != EXTRACTION_FORMAT || self.version != EXTRACTION_VERSION {
            return Err(Error::Config(format!(
                "unsupported extraction format {} v{}",
                self.format, self.version
            )));
        }
        Ok(())
    }

    /// Every event with its sentence index, in document order.
    pub fn mentions(&self) -> Result<Vec<(String, EventMention)>> {
        let mut out = Vec::new();
        for s in &self.sentences {
            for e in &s.events {
                out.push((e.id.clone(), e.to_mention(s.index)?));
            }
        }
        Ok(out)
    }

    pub fn event_count(&self) -> usize {
        self.sentences.iter().map(|s| s.events.len()).sum()
    }

    pub fn sentence(&self, index: usize) -> Option<&SentenceRecord> {
        self.sentences.iter().find(|s| s.index == index)
    }
}

/// Read extraction results from JSON Lines (one document per line) or a
/// single JSON array.
pub fn parse_results(src: &str, origin: &str) -> Result<Vec<ExtractionResult>> {
    let trimmed = src.trim_start();
    if trimmed.starts_with('[') {
        let all: Vec<ExtractionResult> = serde_json::from_str(trimmed)?;
        for r in &all {
            r.check_format()?;
        }
        return Ok(all);
    }
    let mut out = Vec::new();
    for (n, line) in src.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: ExtractionResult =
            serde_json::from_str(line).map_err(|e| Error::parse(origin, n + 1, e.to_string()))?;
        r.check_format().map_err(|e| Error::parse(origin, n + 1, e.to_string()))?;
        out.push(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn event_record_round_trip() {
        let text = "Floods displaced thousands last month";
        let e = EventMention::new("Displace", vec![Span::new(7, 16).unwrap()], 0.9, 2)
            .unwrap()
            .with_arguments(vec![Argument::new("agent", Span::new(0, 6).unwrap(), 0.8).unwrap()])
            .unwrap()
            .with_when(Some(Attachment {
                span: Span::new(27, 37).unwrap(),
                confidence: 0.7,
            }))
            .unwrap();
        let r = EventRecord::from_mention("s2.e0".into(), &e, text);
        assert_eq!(r.anchors[0].text, "displaced");
        assert_eq!(r.arguments[0].text, "Floods");
        assert_eq!(r.when.as_ref().unwrap().text, "last month");
        let json = serde_json::to_value(&r).unwrap();
        assert!(json.get("where").is_some());
        let back: EventRecord = serde_json::from_value(json).unwrap();
        assert_eq!(back.to_mention(2).unwrap(), e);
    }
}
