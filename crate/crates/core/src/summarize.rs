//! Event-centric document summaries: highlight the events of chosen
//! categories or involving chosen participants.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ontology::{AGENT, PATIENT};
use crate::schema::{ExtractionResult, SpanText};
use crate::scorers::words;

/// Event type to display category.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CategoryTable {
    map: BTreeMap<String, String>,
}

impl CategoryTable {
    /// `event_type<TAB>category` lines.
    pub fn parse(src: &str, origin: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, line) in src.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            match line.split_once('\t') {
                Some((t, c)) if !t.trim().is_empty() && !c.trim().is_empty() => {
                    if map.insert(t.trim().to_string(), c.trim().to_string()).is_some() {
                        return Err(Error::parse(origin, n + 1, format!("duplicate event type `{}`", t.trim())));
                    }
                }
                _ => return Err(Error::parse(origin, n + 1, "expected event_type<TAB>category")),
            }
        }
        Ok(CategoryTable { map })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&src, &path.display().to_string())
    }

    pub fn category_of(&self, event_type: &str) -> Option<&str> {
        self.map.get(event_type).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantMention {
    pub event_id: String,
    pub sentence_index: usize,
    pub role: String,
    pub source: SpanText,
    /// The projected English span, when a translation exists.
    pub english: Option<SpanText>,
}

impl ParticipantMention {
    fn name(&self) -> &str {
        self.english.as_ref().map_or(&self.source.text, |e| &e.text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Participant {
    pub name: String,
    pub mentions: Vec<ParticipantMention>,
}

/// `needle` occurs in `hay` in order, not necessarily adjacent.
fn is_subsequence(needle: &[String], hay: &[String]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|w| it.any(|h| h == w))
}

/// Agent and patient arguments grouped by name. Names are compared
/// case-insensitively on their words; two names join a group when one's
/// words are a subsequence of the other's ("Putin", "Vladimir Putin").
/// Groups appear in text order and are named by their longest member.
pub fn group_participants(result: &ExtractionResult) -> Vec<Participant> {
    let mut mentions = Vec::new();
    for s in &result.sentences {
        for e in &s.events {
            for a in e.arguments.iter().filter(|a| a.role == AGENT || a.role == PATIENT) {
                let source = SpanText {
                    start: a.start,
                    end: a.end,
                    text: a.text.clone(),
                };
                let english = s.translation.as_ref().and_then(|t| {
                    t.projections
                        .iter()
                        .find(|p| p.event_id == e.id && p.element == a.role && p.source == source)
                        .and_then(|p| p.target.clone())
                });
                mentions.push(ParticipantMention {
                    event_id: e.id.clone(),
                    sentence_index: s.index,
                    role: a.role.clone(),
                    source,
                    english,
                });
            }
        }
    }

    let keys: Vec<Vec<String>> = mentions.iter().map(|m| words(m.name())).collect();
    let n = mentions.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&keys[i], &keys[j]);
            if a.is_empty() || b.is_empty() {
                continue;
            }
            if is_subsequence(a, b) || is_subsequence(b, a) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }

    let mut order: Vec<usize> = Vec::new();
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        if !groups.contains_key(&r) {
            order.push(r);
        }
        groups.entry(r).or_default().push(i);
    }
    let mut slots: Vec<Option<ParticipantMention>> = mentions.into_iter().map(Some).collect();
    order
        .into_iter()
        .map(|r| {
            let members: Vec<ParticipantMention> =
                groups[&r].iter().map(|&i| slots[i].take().expect("each mention in one group")).collect();
            let mut name = members[0].name();
            for m in &members[1..] {
                if m.name().chars().count() > name.chars().count() {
                    name = m.name();
                }
            }
            Participant {
                name: name.to_string(),
                mentions: members,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    Category(String),
    Participant(String),
}

impl Selection {
    /// `category:NAME` or `participant:NAME`.
    pub fn parse(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some(("category", v)) if !v.trim().is_empty() => Ok(Selection::Category(v.trim().to_string())),
            Some(("participant", v)) if !v.trim().is_empty() => Ok(Selection::Participant(v.trim().to_string())),
            _ => Err(Error::UnknownSelection(s.to_string())),
        }
    }

    pub fn key(&self) -> String {
        match self {
            Selection::Category(c) => format!("category:{c}"),
            Selection::Participant(p) => format!("participant:{p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Highlight {
    pub key: String,
    pub event_id: String,
    pub sentence_index: usize,
    /// Anchors, plus the matched participant spans for participant keys.
    pub spans: Vec<SpanText>,
    /// The same spans in the English translation, where projected.
    pub projected: Vec<SpanText>,
}

/// What a document offers for selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryOptions {
    pub categories: Vec<String>,
    pub participants: Vec<String>,
}

pub fn summary_options(result: &ExtractionResult, categories: &CategoryTable) -> SummaryOptions {
    let mut cats: Vec<String> = Vec::new();
    for s in &result.sentences {
        for e in &s.events {
            if let Some(c) = categories.category_of(&e.event_type) {
                if !cats.iter().any(|x| x == c) {
                    cats.push(c.to_string());
                }
            }
        }
    }
    SummaryOptions {
        categories: cats,
        participants: group_participants(result).into_iter().map(|p| p.name).collect(),
    }
}

/// Highlights for `selections`, in text order then selection order. A
/// selection that names no category or participant of the document is an
/// error.
pub fn summarize_document(
    result: &ExtractionResult,
    categories: &CategoryTable,
    selections: &[Selection],
) -> Result<Vec<Highlight>> {
    let participants = group_participants(result);
    let options = summary_options(result, categories);
    let mut resolved: Vec<(&Selection, Option<&Participant>)> = Vec::new();
    for sel in selections {
        match sel {
            Selection::Category(c) => {
                if !options.categories.iter().any(|x| x.eq_ignore_ascii_case(c)) {
                    return Err(Error::UnknownSelection(sel.key()));
                }
                resolved.push((sel, None));
            }
            Selection::Participant(name) => {
                let p = participants
                    .iter()
                    .find(|p| p.name.to_lowercase() == name.to_lowercase())
                    .ok_or_else(|| Error::UnknownSelection(sel.key()))?;
                resolved.push((sel, Some(p)));
            }
        }
    }

    let mut out = Vec::new();
    for s in &result.sentences {
        for e in &s.events {
            for (sel, participant) in &resolved {
                let mut spans = e.anchors.clone();
                let hit = match (sel, participant) {
                    (Selection::Category(c), _) => categories
                        .category_of(&e.event_type)
                        .is_some_and(|x| x.eq_ignore_ascii_case(c)),
                    (Selection::Participant(_), Some(p)) => {
                        let own: Vec<&ParticipantMention> = p.mentions.iter().filter(|m| m.event_id == e.id).collect();
                        spans.extend(own.iter().map(|m| m.source.clone()));
                        !own.is_empty()
                    }
                    (Selection::Participant(_), None) => false,
                };
                if !hit {
                    continue;
                }
                spans.sort_by_key(|t| (t.start, t.end));
                spans.dedup();
                let projected = s
                    .translation
                    .iter()
                    .flat_map(|t| t.projections.iter())
                    .filter(|p| p.event_id == e.id && spans.contains(&p.source))
                    .filter_map(|p| p.target.clone())
                    .fold(Vec::new(), |mut acc: Vec<SpanText>, t| {
                        if !acc.contains(&t) {
                            acc.push(t);
                        }
                        acc
                    });
                out.push(Highlight {
                    key: sel.key(),
                    event_id: e.id.clone(),
                    sentence_index: s.index,
                    spans,
                    projected,
                });
            }
        }
    }
    Ok(out)
}
