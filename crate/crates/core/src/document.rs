//! Documents, sentences and the sentence-splitting contract.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub index: usize,
    pub text: String,
    /// Character offset of the sentence start within the document text.
    pub char_base: usize,
}

impl Sentence {
    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub language: String,
    pub text: String,
    pub sentences: Vec<Sentence>,
}

impl Document {
    pub fn new(
        id: impl Into<String>,
        language: impl Into<String>,
        text: impl Into<String>,
        splitter: &dyn SentenceSplitter,
    ) -> Result<Self> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(Error::EmptyInput("document text"));
        }
        let sentences = splitter.split(&text);
        Ok(Document {
            id: id.into(),
            language: language.into(),
            text,
            sentences,
        })
    }
}

/// Splits document text into sentences. Returned sentences are ordered, have
/// strictly increasing `char_base`, and exclude surrounding whitespace.
pub trait SentenceSplitter: Send + Sync {
    fn split(&self, text: &str) -> Vec<Sentence>;
}

/// Splits after terminal punctuation followed by whitespace, after
/// full-width terminals unconditionally, and at every newline.
#[derive(Debug, Clone, Default)]
pub struct RuleSplitter;

const TERMINALS: &[char] = &['.', '!', '?', '؟', '۔', '।'];
const FULLWIDTH_TERMINALS: &[char] = &['。', '！', '？'];

impl SentenceSplitter for RuleSplitter {
    fn split(&self, text: &str) -> Vec<Sentence> {
        let chars: Vec<char> = text.chars().collect();
        let mut out = Vec::new();
        let mut start = 0;
        let push = |from: usize, to: usize, out: &mut Vec<Sentence>| {
            let mut a = from;
            let mut b = to;
            while a < b && chars[a].is_whitespace() {
                a += 1;
            }
            while b > a && chars[b - 1].is_whitespace() {
                b -= 1;
            }
            if a < b {
                out.push(Sentence {
                    index: out.len(),
                    text: chars[a..b].iter().collect(),
                    char_base: a,
                });
            }
        };
        for i in 0..chars.len() {
            let c = chars[i];
            let next_is_space = chars.get(i + 1).is_none_or(|n| n.is_whitespace());
            let boundary = c == '\n'
                || FULLWIDTH_TERMINALS.contains(&c)
                || (TERMINALS.contains(&c) && next_is_space);
            if boundary {
                push(start, i + 1, &mut out);
                start = i + 1;
            }
        }
        push(start, chars.len(), &mut out);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LanguageClass {
    WhitespaceDelimited,
    ScriptioContinua,
}

/// Maps language codes to their word-delimiting class by primary subtag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageTable {
    pub scriptio_continua: BTreeSet<String>,
}

impl Default for LanguageTable {
    fn default() -> Self {
        LanguageTable {
            scriptio_continua: ["zh", "ja", "th", "km", "lo", "my"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

impl LanguageTable {
    pub fn class_of(&self, language: &str) -> LanguageClass {
        let primary = primary_subtag(language);
        if self.scriptio_continua.contains(&primary) {
            LanguageClass::ScriptioContinua
        } else {
            LanguageClass::WhitespaceDelimited
        }
    }
}

pub fn primary_subtag(language: &str) -> String {
    language
        .split(['-', '_'])
        .next()
        .unwrap_or("")
        .to_ascii_lowercase()
}

/// Loose BCP-47 shape check: alphanumeric subtags of 1..=8 separated by `-`,
/// primary subtag alphabetic of length 2..=8.
pub fn is_valid_language_tag(tag: &str) -> bool {
    let mut parts = tag.split('-');
    let Some(primary) = parts.next() else {
        return false;
    };
    (2..=8).contains(&primary.len())
        && primary.chars().all(|c| c.is_ascii_alphabetic())
        && parts.all(|p| (1..=8).contains(&p.len()) && p.chars().all(|c| c.is_ascii_alphanumeric()))
}
