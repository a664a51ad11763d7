//! Query construction: structured forms and natural-language queries parsed
//! by running the extractor over the query text.

use std::collections::{BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::Query;
use crate::ontology::{Ontology, AGENT, PATIENT};
use crate::pipeline::Pipeline;
use crate::schema::{ArgumentRecord, EventRecord};
use crate::tokenize::is_boundary_char;

/// Words never used as context terms. Compared case-insensitively.
#[derive(Debug, Clone, Default)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    /// One word per line; blank lines and `#` comments are skipped.
    pub fn parse(src: &str) -> Self {
        Stopwords(
            src.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&src))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(&word.to_lowercase())
    }
}

/// The structured query form as submitted by a client.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StructuredForm {
    #[serde(default)]
    pub types: Vec<String>,
    #[serde(default)]
    pub agent: Option<String>,
    #[serde(default)]
    pub patient: Option<String>,
    #[serde(default)]
    pub location: Option<String>,
    #[serde(default)]
    pub context: Option<String>,
}

fn clean(s: &Option<String>) -> Option<String> {
    s.as_deref()
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
}

pub fn parse_structured(form: &StructuredForm, ontology: &Ontology) -> Result<Query> {
    let mut event_types = BTreeSet::new();
    for t in &form.types {
        if !ontology.has_event_type(t) {
            return Err(Error::UnknownEventType(t.clone()));
        }
        event_types.insert(t.clone());
    }
    let q = Query {
        event_types,
        agent: clean(&form.agent),
        patient: clean(&form.patient),
        location: clean(&form.location),
        context: clean(&form.context),
    };
    q.validate()?;
    Ok(q)
}

fn best<'a>(e: &'a EventRecord, role: &str) -> Option<&'a ArgumentRecord> {
    let mut best: Option<&ArgumentRecord> = None;
    for a in e.arguments.iter().filter(|a| a.role == role) {
        if best.is_none_or(|b| a.confidence > b.confidence) {
            best = Some(a);
        }
    }
    best
}

/// Whitespace-separated words of `text` with surrounding punctuation
/// trimmed, as (start, end, word) in characters.
fn words(text: &str) -> Vec<(usize, usize, String)> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let mut j = i;
        while j < chars.len() && !chars[j].is_whitespace() {
            j += 1;
        }
        let (mut s, mut e) = (i, j);
        while s < e && is_boundary_char(chars[s]) {
            s += 1;
        }
        while e > s && is_boundary_char(chars[e - 1]) {
            e -= 1;
        }
        if s < e {
            out.push((s, e, chars[s..e].iter().collect()));
        }
        i = j;
    }
    out
}

/// Parse an English natural-language query. The highest-confidence event
/// found in the text (first on ties) supplies the event type, agent,
/// patient and location; every remaining non-stopword becomes context.
pub fn nl_to_query(text: &str, pipeline: &Pipeline, stopwords: &Stopwords) -> Result<Query> {
    if text.trim().is_empty() {
        return Err(Error::InvalidQuery("empty query".into()));
    }
    let result = pipeline.extract("query", "en", text)?;

    let mut chosen: Option<(usize, &EventRecord)> = None;
    for s in &result.sentences {
        for e in &s.events {
            if chosen.is_none_or(|(_, c)| e.anchor_confidence > c.anchor_confidence) {
                chosen = Some((s.char_base, e));
            }
        }
    }

    let mut query = Query::default();
    let mut used: Vec<(usize, usize)> = Vec::new();
    if let Some((base, e)) = chosen {
        query.event_types.insert(e.event_type.clone());
        used.extend(e.anchors.iter().map(|a| (base + a.start, base + a.end)));
        if let Some(a) = best(e, AGENT) {
            query.agent = Some(a.text.clone());
            used.push((base + a.start, base + a.end));
        }
        if let Some(a) = best(e, PATIENT) {
            query.patient = Some(a.text.clone());
            used.push((base + a.start, base + a.end));
        }
        if let Some(w) = &e.where_ {
            query.location = Some(w.text.clone());
            used.push((base + w.start, base + w.end));
        }
    }

    let context: Vec<String> = words(text)
        .into_iter()
        .filter(|(s, e, _)| !used.iter().any(|(us, ue)| s < ue && us < e))
        .filter(|(_, _, w)| !stopwords.contains(w))
        .map(|(_, _, w)| w)
        .collect();
    if !context.is_empty() {
        query.context = Some(context.join(" "));
    }
    query.validate()?;
    Ok(query)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn words_trim_punctuation() {
        let w = words("\"anti-inflation\" protests, (Vietnam).");
        let texts: Vec<&str> = w.iter().map(|x| x.2.as_str()).collect();
        assert_eq!(texts, ["anti-inflation", "protests", "Vietnam"]);
        assert_eq!((w[0].0, w[0].1), (1, 15));
    }

    #[test]
    fn structured_validation() {
        let o = Ontology::new(["Protest"], [("agent".to_string(), 1), ("patient".to_string(), 2)]).unwrap();
        let form = StructuredForm {
            types: vec!["Protest".into()],
            location: Some(" Iraq ".into()),
            ..Default::default()
        };
        let q = parse_structured(&form, &o).unwrap();
        assert_eq!(q.location.as_deref(), Some("Iraq"));
        let bad = StructuredForm {
            types: vec!["Arrest".into()],
            ..Default::default()
        };
        assert!(matches!(parse_structured(&bad, &o), Err(Error::UnknownEventType(_))));
        let empty = StructuredForm {
            agent: Some("  ".into()),
            ..Default::default()
        };
        assert!(matches!(parse_structured(&empty, &o), Err(Error::InvalidQuery(_))));
    }

    #[test]
    fn stopwords_ignore_case() {
        let s = Stopwords::parse("# c\nIn\n\nby\n");
        assert!(s.contains("in") && s.contains("BY") && !s.contains("#"));
    }
}
