//! Rule-driven scorers: every label named by a matching rule scores `+5`,
//! everything else `-5`.
//!
//! Rules file, UTF-8, tab-separated, three sections:
//!
//! ```text
//! [triggers]
//! # phrase      event type
//! protests	Protest
//! [arguments]
//! # anchor phrase (or *)   role (or when / where)   argument phrase
//! displaced	agent	Floods
//! *	where	Vietnam
//! [relations]
//! # first anchor   second anchor   related-event | coreference | none
//! withdrawing	buying	related-event
//! ```
//!
//! Phrases match case-insensitively on token boundaries; a space in a
//! phrase matches any run of whitespace.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use super::{AnchorScorer, ArgumentQuery, ArgumentScorer, PairScorer, Provider, QaScorer};
use crate::document::Sentence;
use crate::error::{Error, Result};
use crate::extract::{LabelScoreMatrix, QASpanScores, QaQuestion, QuestionKind, Tagset};
use crate::ontology::Ontology;
use crate::relations::{AnchorRef, PairLabel, PairScores};
use crate::tokenize::Subword;

pub const HOT: f64 = 5.0;
pub const COLD: f64 = -5.0;

const WILDCARD: &str = "*";

#[derive(Debug, Clone, PartialEq, Eq)]
struct ArgumentRule {
    anchor: String,
    role: String,
    phrase: String,
}

#[derive(Debug, Clone, Default)]
pub struct RuleSet {
    triggers: BTreeMap<String, String>,
    arguments: Vec<ArgumentRule>,
    relations: BTreeMap<(String, String), PairLabel>,
    digest: String,
}

/// Lowercase and collapse whitespace so phrases compare by content.
fn normalize(s: &str) -> String {
    s.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

impl RuleSet {
    pub fn parse(src: &str, origin: &str) -> Result<Self> {
        let mut rules = RuleSet {
            digest: hex8(src),
            ..RuleSet::default()
        };
        let mut section: Option<&str> = None;
        for (n, raw) in src.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.trim_end_matches('\r');
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if let Some(name) = trimmed.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = match name {
                    "triggers" | "arguments" | "relations" => Some(name),
                    _ => return Err(Error::parse(origin, line_no, format!("unknown section `{name}`"))),
                };
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            let err = |m: &str| Error::parse(origin, line_no, m);
            if fields.iter().any(|f| f.is_empty()) {
                return Err(err("empty field"));
            }
            match (section, fields.as_slice()) {
                (None, _) => return Err(err("rule outside of a section")),
                (Some("triggers"), [phrase, event_type]) => {
                    let key = normalize(phrase);
                    match rules.triggers.get(&key) {
                        Some(t) if t != event_type => {
                            return Err(err(&format!("`{phrase}` already triggers `{t}`")))
                        }
                        _ => {
                            rules.triggers.insert(key, event_type.to_string());
                        }
                    }
                }
                (Some("arguments"), [anchor, role, phrase]) => {
                    let rule = ArgumentRule {
                        anchor: normalize(anchor),
                        role: role.to_string(),
                        phrase: normalize(phrase),
                    };
                    if let Some(other) = rules
                        .arguments
                        .iter()
                        .find(|r| r.anchor == rule.anchor && r.phrase == rule.phrase && r.role != rule.role)
                    {
                        return Err(err(&format!(
                            "`{phrase}` already has role `{}` for anchor `{anchor}`",
                            other.role
                        )));
                    }
                    if !rules.arguments.contains(&rule) {
                        rules.arguments.push(rule);
                    }
                }
                (Some("relations"), [first, second, label]) => {
                    let label = PairLabel::parse(label)
                        .ok_or_else(|| err(&format!("unknown relation label `{label}`")))?;
                    let key = (normalize(first), normalize(second));
                    match rules.relations.get(&key) {
                        Some(l) if *l != label => {
                            return Err(err(&format!("`{first}`/`{second}` already labelled `{}`", l.name())))
                        }
                        _ => {
                            rules.relations.insert(key, label);
                        }
                    }
                }
                (Some(s), _) => {
                    let want = if s == "triggers" { 2 } else { 3 };
                    return Err(err(&format!("expected {want} tab-separated fields in [{s}]")));
                }
            }
        }
        Ok(rules)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&src, &path.display().to_string())
    }

    pub fn event_types(&self) -> BTreeSet<&str> {
        self.triggers.values().map(String::as_str).collect()
    }

    /// Check every type and role against `ontology`.
    pub fn validate(&self, ontology: &Ontology) -> Result<()> {
        for t in self.triggers.values() {
            if !ontology.has_event_type(t) {
                return Err(Error::UnknownEventType(t.clone()));
            }
        }
        for r in &self.arguments {
            if !(ontology.has_role(&r.role) || r.role == "when" || r.role == "where") {
                return Err(Error::Ontology(format!("rules use unknown role `{}`", r.role)));
            }
        }
        Ok(())
    }
}

fn hex8(src: &str) -> String {
    Sha256::digest(src.as_bytes())[..4]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Token ranges (half-open) where `phrase` occurs in `text` starting and
/// ending on token boundaries.
fn find_phrase(text: &[char], tokens: &[Subword], phrase: &str) -> Vec<std::ops::Range<usize>> {
    let phrase: Vec<char> = phrase.chars().collect();
    let mut out = Vec::new();
    if phrase.is_empty() {
        return out;
    }
    for (ti, t) in tokens.iter().enumerate() {
        let Some(end) = match_at(text, t.span.start(), &phrase) else {
            continue;
        };
        if let Some(tj) = tokens[ti..].iter().position(|u| u.span.end() == end) {
            out.push(ti..ti + tj + 1);
        }
    }
    out
}

fn match_at(text: &[char], start: usize, phrase: &[char]) -> Option<usize> {
    let mut i = start;
    let mut p = 0;
    while p < phrase.len() {
        if phrase[p] == ' ' {
            if i >= text.len() || !text[i].is_whitespace() {
                return None;
            }
            while i < text.len() && text[i].is_whitespace() {
                i += 1;
            }
        } else {
            let c = *text.get(i)?;
            if !c.to_lowercase().eq(phrase[p].to_lowercase()) {
                return None;
            }
            i += 1;
        }
        p += 1;
    }
    Some(i)
}

/// Anchor, argument, pair and QA scorers driven by one [`RuleSet`].
#[derive(Debug)]
pub struct RuleScorers {
    rules: RuleSet,
    anchor_tags: Arc<Tagset>,
    role_tags: Arc<Tagset>,
    id: String,
}

impl RuleScorers {
    /// `event_types` fixes the anchor tagset; types named by triggers are
    /// added if missing.
    pub fn new<'a>(rules: RuleSet, event_types: impl IntoIterator<Item = &'a str>) -> Self {
        let mut types: BTreeSet<&str> = event_types.into_iter().collect();
        types.extend(rules.event_types());
        let anchor_tags = Arc::new(Tagset::for_event_types(types));
        let id = format!("rule-scorer/{}", rules.digest);
        RuleScorers {
            rules,
            anchor_tags,
            role_tags: Arc::new(Tagset::for_role()),
            id,
        }
    }

    pub fn anchor_tagset(&self) -> &Arc<Tagset> {
        &self.anchor_tags
    }

    fn anchor_matches(rule_anchor: &str, anchor_text: &str) -> bool {
        rule_anchor == WILDCARD || rule_anchor == normalize(anchor_text)
    }

    fn argument_phrases<'a>(&'a self, anchor_text: &'a str, role: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.rules
            .arguments
            .iter()
            .filter(move |r| r.role == role && Self::anchor_matches(&r.anchor, anchor_text))
            .map(|r| r.phrase.as_str())
    }
}

/// Mark a matched token range in BIO: tokens of the first word get `B`,
/// later ones `I`.
fn mark(m: &mut LabelScoreMatrix, tokens: &[Subword], rows: &[usize], range: std::ops::Range<usize>, b: usize, i: usize) {
    let first_word = tokens[range.start].word_index;
    for t in range.clone() {
        let begin = t == range.start || (first_word.is_some() && tokens[t].word_index == first_word);
        let row = rows[t];
        let o = m.tagset().outside();
        m.set(row, o, COLD);
        m.set(row, if begin { b } else { i }, HOT);
    }
}

fn outside_matrix(tags: &Arc<Tagset>, rows: usize) -> LabelScoreMatrix {
    let mut m = LabelScoreMatrix::filled(tags.clone(), rows, COLD, COLD);
    let o = tags.outside();
    for r in 0..rows {
        m.set(r, o, HOT);
    }
    m
}

impl Provider for RuleScorers {
    fn id(&self) -> &str {
        &self.id
    }
}

impl AnchorScorer for RuleScorers {
    fn score(&self, sentence: &Sentence, tokens: &[Subword]) -> Result<LabelScoreMatrix> {
        let chars: Vec<char> = sentence.text.chars().collect();
        let mut m = outside_matrix(&self.anchor_tags, tokens.len());
        let mut taken = vec![false; tokens.len()];
        // Longer phrases claim their tokens first.
        let mut triggers: Vec<(&String, &String)> = self.rules.triggers.iter().collect();
        triggers.sort_by_key(|(p, _)| std::cmp::Reverse(p.chars().count()));
        let rows: Vec<usize> = (0..tokens.len()).collect();
        for (phrase, event_type) in triggers {
            let b = self.anchor_tags.position(&format!("B-{event_type}")).expect("type in tagset");
            let i = self.anchor_tags.position(&format!("I-{event_type}")).expect("type in tagset");
            for range in find_phrase(&chars, tokens, phrase) {
                if taken[range.clone()].iter().any(|t| *t) {
                    continue;
                }
                taken[range.clone()].iter_mut().for_each(|t| *t = true);
                mark(&mut m, tokens, &rows, range, b, i);
            }
        }
        Ok(m)
    }
}

impl ArgumentScorer for RuleScorers {
    fn score(&self, q: &ArgumentQuery<'_>) -> Result<LabelScoreMatrix> {
        let chars: Vec<char> = q.sentence.text.chars().collect();
        let mut m = outside_matrix(&self.role_tags, q.input.items.len());
        let token_rows = q.input.token_rows();
        let anchor_text = q.anchor.slice(&q.sentence.text);
        let (b, i) = (1, 2);
        for phrase in self.argument_phrases(anchor_text, q.role) {
            for range in find_phrase(&chars, q.tokens, phrase) {
                mark(&mut m, q.tokens, &token_rows, range, b, i);
            }
        }
        Ok(m)
    }
}

impl PairScorer for RuleScorers {
    fn score(&self, sentence: &Sentence, _tokens: &[Subword], anchors: &[AnchorRef]) -> Result<PairScores> {
        let n = anchors.len();
        let mut scores = PairScores::uniform_none(n, HOT);
        let texts: Vec<String> = anchors.iter().map(|a| normalize(a.span.slice(&sentence.text))).collect();
        let hot = |label: PairLabel| {
            let mut s = [COLD; 3];
            s[label.index()] = HOT;
            s
        };
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                let key = (texts[a].clone(), texts[b].clone());
                match self.rules.relations.get(&key) {
                    Some(PairLabel::Coreference) => {
                        scores.set(a, b, hot(PairLabel::Coreference));
                        scores.set(b, a, hot(PairLabel::Coreference));
                    }
                    Some(l) => scores.set(a, b, hot(*l)),
                    None => {}
                }
            }
        }
        Ok(scores)
    }
}

impl QaScorer for RuleScorers {
    fn score(&self, sentence: &Sentence, tokens: &[Subword], question: &QaQuestion) -> Result<QASpanScores> {
        let chars: Vec<char> = sentence.text.chars().collect();
        let role = match question.kind {
            QuestionKind::When => "when",
            QuestionKind::Where => "where",
        };
        let mut start_scores = vec![COLD; tokens.len()];
        let mut end_scores = vec![COLD; tokens.len()];
        for phrase in self.argument_phrases(&question.anchor_text, role) {
            for range in find_phrase(&chars, tokens, phrase) {
                start_scores[range.start] = HOT;
                end_scores[range.end - 1] = HOT;
            }
        }
        Ok(QASpanScores {
            start_scores,
            end_scores,
            null_score: 0.0,
        })
    }
}

/// Load a rules file and check it against `ontology`.
pub fn load_rule_scorer(path: &Path, ontology: &Ontology) -> Result<RuleScorers> {
    let rules = RuleSet::load(path)?;
    rules.validate(ontology)?;
    Ok(RuleScorers::new(
        rules,
        ontology.event_types().iter().map(String::as_str),
    ))
}
