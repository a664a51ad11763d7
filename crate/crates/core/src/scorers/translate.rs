//! Stand-in translation providers.

use std::collections::HashMap;
use std::path::Path;

use super::{Provider, TranslationProvider};
use crate::error::{Error, Result};
use crate::tokenize::is_boundary_char;

/// Returns the input unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityTranslator;

impl Provider for IdentityTranslator {
    fn id(&self) -> &str {
        "identity-translation"
    }
}

impl TranslationProvider for IdentityTranslator {
    fn translate(&self, text: &str, _source_language: &str) -> Result<String> {
        Ok(text.to_string())
    }
}

/// Word-by-word lookup from a `source<TAB>english` table. Punctuation
/// around a word is kept; unknown words pass through.
#[derive(Debug, Clone, Default)]
pub struct DictionaryTranslator {
    entries: HashMap<String, String>,
}

impl DictionaryTranslator {
    pub fn new<I, S, T>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, T)>,
        S: AsRef<str>,
        T: Into<String>,
    {
        DictionaryTranslator {
            entries: entries
                .into_iter()
                .map(|(s, t)| (s.as_ref().to_lowercase(), t.into()))
                .collect(),
        }
    }

    pub fn parse(src: &str, origin: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in src.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            match line.split_once('\t') {
                Some((s, t)) if !s.trim().is_empty() && !t.trim().is_empty() => {
                    entries.push((s.trim().to_string(), t.trim().to_string()))
                }
                _ => return Err(Error::parse(origin, n + 1, "expected source<TAB>english")),
            }
        }
        Ok(Self::new(entries))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&src, &path.display().to_string())
    }

    /// The English entry for one word, ignoring case.
    pub fn gloss(&self, word: &str) -> Option<&str> {
        self.entries.get(&word.to_lowercase()).map(String::as_str)
    }

    fn word(&self, w: &str) -> String {
        let core_start = w.find(|c: char| !is_boundary_char(c)).unwrap_or(w.len());
        let core_end = w
            .rfind(|c: char| !is_boundary_char(c))
            .map(|i| i + w[i..].chars().next().map_or(0, char::len_utf8))
            .unwrap_or(core_start);
        let core = &w[core_start..core_end.max(core_start)];
        match self.entries.get(&core.to_lowercase()) {
            Some(t) => format!("{}{t}{}", &w[..core_start], &w[core_end.max(core_start)..]),
            None => w.to_string(),
        }
    }
}

impl Provider for DictionaryTranslator {
    fn id(&self) -> &str {
        "dictionary-translation"
    }
}

impl TranslationProvider for DictionaryTranslator {
    fn translate(&self, text: &str, _source_language: &str) -> Result<String> {
        let words: Vec<String> = text.split_whitespace().map(|w| self.word(w)).collect();
        Ok(words.join(" "))
    }
}
