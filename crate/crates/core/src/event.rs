//! Event mentions, arguments and the event graph.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ontology::{Ontology, RELATED_EVENT};
use crate::span::Span;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Argument {
    pub role: String,
    pub span: Span,
    pub confidence: f64,
}

impl Argument {
    pub fn new(role: impl Into<String>, span: Span, confidence: f64) -> Result<Self> {
        check_confidence(confidence)?;
        Ok(Argument {
            role: role.into(),
            span,
            confidence,
        })
    }
}

/// A when/where attachment produced by the question-answering decoder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Attachment {
    pub span: Span,
    pub confidence: f64,
}

fn check_confidence(c: f64) -> Result<()> {
    if (0.0..=1.0).contains(&c) {
        Ok(())
    } else {
        Err(Error::InvalidEvent(format!("confidence {c} outside [0, 1]")))
    }
}

/// A typed event with one or more anchors in a single sentence.
///
/// Fields are private so that every instance satisfies the invariants
/// checked in [`EventMention::new`]: at least one anchor, pairwise
/// non-overlapping anchors sorted by offset, and confidences in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventMention {
    event_type: String,
    anchors: Vec<Span>,
    arguments: Vec<Argument>,
    when: Option<Attachment>,
    #[serde(rename = "where")]
    where_: Option<Attachment>,
    anchor_confidence: f64,
    sentence_index: usize,
}

#[derive(Deserialize)]
struct RawEventMention {
    event_type: String,
    anchors: Vec<Span>,
    #[serde(default)]
    arguments: Vec<Argument>,
    #[serde(default)]
    when: Option<Attachment>,
    #[serde(default, rename = "where")]
    where_: Option<Attachment>,
    anchor_confidence: f64,
    sentence_index: usize,
}

impl<'de> Deserialize<'de> for EventMention {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = RawEventMention::deserialize(d)?;
        EventMention::new(r.event_type, r.anchors, r.anchor_confidence, r.sentence_index)
            .and_then(|e| e.with_arguments(r.arguments))
            .and_then(|e| e.with_when(r.when))
            .and_then(|e| e.with_where(r.where_))
            .map_err(serde::de::Error::custom)
    }
}

impl EventMention {
    pub fn new(
        event_type: impl Into<String>,
        mut anchors: Vec<Span>,
        anchor_confidence: f64,
        sentence_index: usize,
    ) -> Result<Self> {
        let event_type = event_type.into();
        if event_type.is_empty() {
            return Err(Error::InvalidEvent("empty event type".into()));
        }
        if anchors.is_empty() {
            return Err(Error::InvalidEvent("event without anchors".into()));
        }
        anchors.sort();
        if anchors.windows(2).any(|w| w[0].overlaps(&w[1])) {
            return Err(Error::InvalidEvent("overlapping anchors".into()));
        }
        check_confidence(anchor_confidence)?;
        Ok(EventMention {
            event_type,
            anchors,
            arguments: Vec::new(),
            when: None,
            where_: None,
            anchor_confidence,
            sentence_index,
        })
    }

    pub fn with_arguments(mut self, arguments: Vec<Argument>) -> Result<Self> {
        for a in &arguments {
            check_confidence(a.confidence)?;
        }
        self.arguments = arguments;
        Ok(self)
    }

    pub fn with_when(mut self, when: Option<Attachment>) -> Result<Self> {
        if let Some(a) = &when {
            check_confidence(a.confidence)?;
        }
        self.when = when;
        Ok(self)
    }

    pub fn with_where(mut self, where_: Option<Attachment>) -> Result<Self> {
        if let Some(a) = &where_ {
            check_confidence(a.confidence)?;
        }
        self.where_ = where_;
        Ok(self)
    }

    pub fn event_type(&self) -> &str {
        &self.event_type
    }

    /// Anchors sorted by offset.
    pub fn anchors(&self) -> &[Span] {
        &self.anchors
    }

    pub fn first_anchor(&self) -> Span {
        self.anchors[0]
    }

    pub fn arguments(&self) -> &[Argument] {
        &self.arguments
    }

    pub fn arguments_with_role<'a>(&'a self, role: &'a str) -> impl Iterator<Item = &'a Argument> {
        self.arguments.iter().filter(move |a| a.role == role)
    }

    pub fn when(&self) -> Option<Attachment> {
        self.when
    }

    pub fn where_(&self) -> Option<Attachment> {
        self.where_
    }

    pub fn anchor_confidence(&self) -> f64 {
        self.anchor_confidence
    }

    pub fn sentence_index(&self) -> usize {
        self.sentence_index
    }

    /// Every span the event references.
    pub fn all_spans(&self) -> impl Iterator<Item = Span> + '_ {
        self.anchors
            .iter()
            .copied()
            .chain(self.arguments.iter().map(|a| a.span))
            .chain(self.when.map(|a| a.span))
            .chain(self.where_.map(|a| a.span))
    }

    /// Check the parts of the invariant that need outside context.
    pub fn validate(&self, ontology: &Ontology, sentence_len: usize) -> Result<()> {
        if !ontology.has_event_type(&self.event_type) {
            return Err(Error::UnknownEventType(self.event_type.clone()));
        }
        for a in &self.arguments {
            if !ontology.has_role(&a.role) || a.role == RELATED_EVENT {
                return Err(Error::InvalidEvent(format!("bad argument role `{}`", a.role)));
            }
        }
        if let Some(s) = self.all_spans().find(|s| s.end() > sentence_len) {
            return Err(Error::InvalidEvent(format!(
                "span [{}, {}) exceeds sentence length {sentence_len}",
                s.start(),
                s.end()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphArgument {
    pub role: String,
    pub text: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    /// Stable id of the form `s{sentence}.e{event}`.
    pub id: String,
    pub sentence_index: usize,
    pub event_type: String,
    pub label: String,
    pub arguments: Vec<GraphArgument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub from: String,
    pub to: String,
    pub label: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EventGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

pub fn node_id(sentence_index: usize, event_index: usize) -> String {
    format!("s{sentence_index}.e{event_index}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(a: usize, b: usize) -> Span {
        Span::new(a, b).unwrap()
    }

    #[test]
    fn construction_enforces_invariants() {
        assert!(EventMention::new("Protest", vec![], 0.5, 0).is_err());
        assert!(EventMention::new("Protest", vec![sp(0, 4), sp(2, 6)], 0.5, 0).is_err());
        assert!(EventMention::new("Protest", vec![sp(0, 4)], 1.5, 0).is_err());
        let e = EventMention::new("Protest", vec![sp(8, 10), sp(0, 4)], 0.5, 0).unwrap();
        assert_eq!(e.anchors(), &[sp(0, 4), sp(8, 10)]);
        assert!(Argument::new("agent", sp(0, 1), -0.1).is_err());
    }

    #[test]
    fn deserialization_validates() {
        let bad = r#"{"event_type":"X","anchors":[],"anchor_confidence":0.5,"sentence_index":0}"#;
        assert!(serde_json::from_str::<EventMention>(bad).is_err());
        let good = r#"{"event_type":"X","anchors":[{"start":0,"end":3}],"anchor_confidence":0.5,"sentence_index":0}"#;
        let e: EventMention = serde_json::from_str(good).unwrap();
        assert_eq!(e.first_anchor(), sp(0, 3));
    }

    #[test]
    fn validate_against_ontology() {
        let o = Ontology::new(["Protest"], [("agent".into(), 1), ("patient".into(), 2)]).unwrap();
        let e = EventMention::new("Protest", vec![sp(0, 4)], 0.5, 0).unwrap();
        assert!(e.validate(&o, 10).is_ok());
        assert!(e.validate(&o, 3).is_err());
        let other = EventMention::new("Arrest", vec![sp(0, 4)], 0.5, 0).unwrap();
        assert!(other.validate(&o, 10).is_err());
        let bad_role = e
            .clone()
            .with_arguments(vec![Argument::new("victim", sp(5, 6), 0.5).unwrap()])
            .unwrap();
        assert!(bad_role.validate(&o, 10).is_err());
    }
}
