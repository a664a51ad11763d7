//! Subword tokens, word-boundary span expansion and per-word label
//! conflict resolution.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_general_category::{get_general_category, GeneralCategory};

use crate::document::{LanguageClass, Sentence};
use crate::error::{Error, Result};
use crate::scorers::{Provider, SubwordTokenizer};
use crate::span::Span;

pub const OUTSIDE: &str = "O";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subword {
    pub text: String,
    pub span: Span,
    /// Ordinal of the whitespace-delimited word containing this piece.
    /// Absent for scriptio-continua text.
    pub word_index: Option<usize>,
}

/// Tokenize one sentence through `tokenizer` and check the result covers
/// every non-whitespace character exactly once, in order.
pub fn tokenize(
    sentence: &Sentence,
    tokenizer: &dyn SubwordTokenizer,
    class: LanguageClass,
) -> Result<Vec<Subword>> {
    let fail = |message: String| Error::Tokenizer {
        sentence: sentence.index,
        message,
    };
    if sentence.text.is_empty() {
        return Err(fail("empty sentence".into()));
    }
    let tokens = tokenizer
        .tokenize(&sentence.text, class)
        .map_err(|e| fail(e.to_string()))?;

    let chars: Vec<char> = sentence.text.chars().collect();
    let mut covered = vec![false; chars.len()];
    let mut prev_end = 0;
    for t in &tokens {
        if t.span.start() < prev_end || t.span.end() > chars.len() {
            return Err(fail(format!(
                "subword [{}, {}) out of order or out of range",
                t.span.start(),
                t.span.end()
            )));
        }
        prev_end = t.span.end();
        for c in &mut covered[t.span.start()..t.span.end()] {
            *c = true;
        }
    }
    if let Some(i) = (0..chars.len()).find(|&i| !covered[i] && !chars[i].is_whitespace()) {
        return Err(fail(format!("character {i} not covered by any subword")));
    }
    Ok(tokens)
}

/// Whitespace or any Unicode punctuation (general category P*).
pub fn is_boundary_char(c: char) -> bool {
    c.is_whitespace()
        || matches!(
            get_general_category(c),
            GeneralCategory::ConnectorPunctuation
                | GeneralCategory::DashPunctuation
                | GeneralCategory::OpenPunctuation
                | GeneralCategory::ClosePunctuation
                | GeneralCategory::InitialPunctuation
                | GeneralCategory::FinalPunctuation
                | GeneralCategory::OtherPunctuation
        )
}

/// Widen `span` outwards to the nearest whitespace or punctuation on each
/// side. Scriptio-continua text is returned unchanged.
pub fn expand_span(span: Span, sentence: &Sentence, class: LanguageClass) -> Span {
    let chars: Vec<char> = sentence.text.chars().collect();
    expand_in_chars(span, &chars, class)
}

pub(crate) fn expand_in_chars(span: Span, chars: &[char], class: LanguageClass) -> Span {
    if class == LanguageClass::ScriptioContinua {
        return span;
    }
    let mut start = span.start().min(chars.len());
    while start > 0 && !is_boundary_char(chars[start - 1]) {
        start -= 1;
    }
    let mut end = span.end().min(chars.len()).max(start + 1);
    while end < chars.len() && !is_boundary_char(chars[end]) {
        end += 1;
    }
    Span::new(start, end).expect("expansion never shrinks a span")
}

/// Label frequencies used to break ties between conflicting subword labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelStats {
    counts: BTreeMap<String, u64>,
}

impl Default for LabelStats {
    fn default() -> Self {
        let mut counts = BTreeMap::new();
        counts.insert(OUTSIDE.to_string(), 0);
        LabelStats { counts }
    }
}

impl LabelStats {
    pub fn from_counts<I, S>(counts: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut stats = LabelStats::default();
        for (l, c) in counts {
            stats.counts.insert(l.into(), c);
        }
        stats
    }

    /// Parse `label<TAB>count` lines. Blank lines and `#` comments are skipped.
    pub fn parse(src: &str, origin: &str) -> Result<Self> {
        let mut stats = LabelStats::default();
        for (n, line) in src.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (label, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(origin, n + 1, "expected label<TAB>count"))?;
            let count: u64 = count
                .trim()
                .parse()
                .map_err(|_| Error::parse(origin, n + 1, format!("bad count `{count}`")))?;
            if label.is_empty() {
                return Err(Error::parse(origin, n + 1, "empty label"));
            }
            stats.counts.insert(label.to_string(), count);
        }
        Ok(stats)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&src, &path.display().to_string())
    }

    /// Add zero-count entries for any of `labels` not yet known.
    pub fn with_labels<'a>(mut self, labels: impl IntoIterator<Item = &'a str>) -> Self {
        for l in labels {
            self.counts.entry(l.to_string()).or_insert(0);
        }
        self
    }

    pub fn frequency(&self, label: &str) -> Option<u64> {
        self.counts.get(label).copied()
    }
}

/// Collapse the labels of one word's subwords into a single label: majority
/// vote, then higher corpus frequency, then lexicographically smallest.
pub fn resolve_word_label(subword_labels: &[&str], stats: &LabelStats) -> Result<String> {
    if subword_labels.is_empty() {
        return Err(Error::EmptyInput("subword labels"));
    }
    let mut votes: BTreeMap<&str, (usize, u64)> = BTreeMap::new();
    for l in subword_labels {
        let freq = stats
            .frequency(l)
            .ok_or_else(|| Error::UnknownLabel(l.to_string()))?;
        votes.entry(l).or_insert((0, freq)).0 += 1;
    }
    // BTreeMap iterates lexicographically; `max_by` keeps the last maximum,
    // so iterate in reverse to let the smallest label win exact ties.
    let (label, _) = votes
        .iter()
        .rev()
        .max_by(|a, b| a.1.cmp(b.1))
        .expect("non-empty");
    Ok(label.to_string())
}

/// Deterministic reference tokenizer.
///
/// Whitespace-delimited text is split on whitespace into words, punctuation
/// characters become their own pieces, and any remaining run longer than
/// `chunk` characters that is not in the lexicon is cut into `chunk`-sized
/// pieces. Scriptio-continua text is cut into lexicon words (longest match)
/// or single characters.
#[derive(Debug, Clone)]
pub struct RuleTokenizer {
    chunk: Option<usize>,
    lexicon: HashSet<String>,
    id: String,
}

impl Default for RuleTokenizer {
    fn default() -> Self {
        RuleTokenizer::new(Some(3))
    }
}

impl RuleTokenizer {
    pub fn new(chunk: Option<usize>) -> Self {
        let id = match chunk {
            Some(n) => format!("rule-tokenizer/chunk={n}"),
            None => "rule-tokenizer/whole-words".to_string(),
        };
        RuleTokenizer {
            chunk: chunk.filter(|n| *n > 0),
            lexicon: HashSet::new(),
            id,
        }
    }

    /// Words that are never chunked.
    pub fn with_lexicon<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.lexicon
            .extend(words.into_iter().map(|w| w.as_ref().to_lowercase()));
        self
    }

    pub fn load_lexicon(self, path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let words: Vec<&str> = src
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
        Ok(self.with_lexicon(words))
    }

    fn in_lexicon(&self, chars: &[char]) -> bool {
        let s: String = chars.iter().collect();
        self.lexicon.contains(&s.to_lowercase())
    }

    fn push(out: &mut Vec<Subword>, chars: &[char], start: usize, end: usize, word: Option<usize>) {
        out.push(Subword {
            text: chars[start..end].iter().collect(),
            span: Span::new(start, end).expect("non-empty piece"),
            word_index: word,
        });
    }

    fn split_run(&self, out: &mut Vec<Subword>, chars: &[char], start: usize, end: usize, word: Option<usize>) {
        let len = end - start;
        match self.chunk {
            Some(n) if len > n && !self.in_lexicon(&chars[start..end]) => {
                let mut s = start;
                while s < end {
                    let e = (s + n).min(end);
                    Self::push(out, chars, s, e, word);
                    s = e;
                }
            }
            _ => Self::push(out, chars, start, end, word),
        }
    }

    fn split_continua(&self, out: &mut Vec<Subword>, chars: &[char], start: usize, end: usize) {
        let longest = self.lexicon.iter().map(|w| w.chars().count()).max().unwrap_or(0);
        let mut s = start;
        while s < end {
            let max_len = longest.min(end - s);
            let len = (2..=max_len)
                .rev()
                .find(|&l| self.in_lexicon(&chars[s..s + l]))
                .unwrap_or(1);
            Self::push(out, chars, s, s + len, None);
            s += len;
        }
    }
}

impl Provider for RuleTokenizer {
    fn id(&self) -> &str {
        &self.id
    }
}

impl SubwordTokenizer for RuleTokenizer {
    fn tokenize(&self, text: &str, class: LanguageClass) -> Result<Vec<Subword>> {
        let chars: Vec<char> = text.chars().collect();
        let mut out = Vec::new();
        let mut word = 0usize;
        let mut i = 0;
        while i < chars.len() {
            if chars[i].is_whitespace() {
                i += 1;
                continue;
            }
            let word_start = i;
            while i < chars.len() && !chars[i].is_whitespace() {
                i += 1;
            }
            let word_end = i;
            let word_index = match class {
                LanguageClass::WhitespaceDelimited => Some(word),
                LanguageClass::ScriptioContinua => None,
            };
            let mut j = word_start;
            while j < word_end {
                if is_boundary_char(chars[j]) {
                    Self::push(&mut out, &chars, j, j + 1, word_index);
                    j += 1;
                    continue;
                }
                let run_start = j;
                while j < word_end && !is_boundary_char(chars[j]) {
                    j += 1;
                }
                match class {
                    LanguageClass::WhitespaceDelimited => {
                        self.split_run(&mut out, &chars, run_start, j, word_index)
                    }
                    LanguageClass::ScriptioContinua => {
                        self.split_continua(&mut out, &chars, run_start, j)
                    }
                }
            }
            word += 1;
        }
        Ok(out)
    }
}

fn is_punctuation(t: &Subword) -> bool {
    t.text.chars().all(is_boundary_char)
}

/// Contiguous groups of token indices that form one labeling unit. For
/// whitespace-delimited text a unit is a run of subwords of the same word,
/// with punctuation pieces split off ("ropy." gives "ropy" and "."), so that
/// units agree with the boundaries used by span expansion. Otherwise every
/// subword is its own unit.
pub fn word_units(tokens: &[Subword], class: LanguageClass) -> Vec<std::ops::Range<usize>> {
    let mut units: Vec<std::ops::Range<usize>> = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        let joins = class == LanguageClass::WhitespaceDelimited
            && t.word_index.is_some()
            && i > 0
            && tokens[i - 1].word_index == t.word_index
            && is_punctuation(&tokens[i - 1]) == is_punctuation(t);
        match units.last_mut() {
            Some(u) if joins => u.end = i + 1,
            _ => units.push(i..i + 1),
        }
    }
    units
}
