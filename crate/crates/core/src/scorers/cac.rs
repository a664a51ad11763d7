//! Cross-lingual alignment confidence providers.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::sync::Arc;

use super::{CacProvider, EmbeddingProvider, Provider};
use crate::error::{Error, Result};
use crate::span::Span;
use crate::tokenize::{is_boundary_char, Subword};

/// Lowercased words of `text`, split at whitespace and punctuation.
pub(crate) fn words(text: &str) -> Vec<String> {
    text.split(is_boundary_char)
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Cosine similarity of the mean embedding of each text, clamped to
/// `[0, 1]`. Texts without words score 0.
pub struct EmbeddingCac {
    embeddings: Arc<dyn EmbeddingProvider>,
    id: String,
}

impl EmbeddingCac {
    pub fn new(embeddings: Arc<dyn EmbeddingProvider>) -> Self {
        let id = format!("embedding-cac/{}", embeddings.id());
        EmbeddingCac { embeddings, id }
    }

    fn mean_vector(&self, text: &str) -> Result<Option<Vec<f64>>> {
        let tokens: Vec<Subword> = words(text)
            .into_iter()
            .enumerate()
            .map(|(i, w)| Subword {
                text: w,
                span: Span::new(i, i + 1).expect("non-empty"),
                word_index: Some(i),
            })
            .collect();
        if tokens.is_empty() {
            return Ok(None);
        }
        let vectors = self.embeddings.embed(&tokens, "und")?;
        let dim = self.embeddings.dimension();
        let mut mean = vec![0.0; dim];
        for v in &vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            for (m, x) in mean.iter_mut().zip(v) {
                *m += x / vectors.len() as f64;
            }
        }
        Ok(Some(mean))
    }
}

impl Provider for EmbeddingCac {
    fn id(&self) -> &str {
        &self.id
    }

    fn concurrent(&self) -> bool {
        self.embeddings.concurrent()
    }
}

impl CacProvider for EmbeddingCac {
    fn cac(&self, english: &str, foreign: &str) -> Result<f64> {
        let (Some(a), Some(b)) = (self.mean_vector(english)?, self.mean_vector(foreign)?) else {
            return Ok(0.0);
        };
        let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            return Ok(0.0);
        }
        Ok((dot / (na * nb)).clamp(0.0, 1.0))
    }
}

/// Fraction of the English words that also occur in the foreign text.
#[derive(Debug, Clone, Copy, Default)]
pub struct LexicalCac;

impl Provider for LexicalCac {
    fn id(&self) -> &str {
        "lexical-cac"
    }
}

impl CacProvider for LexicalCac {
    fn cac(&self, english: &str, foreign: &str) -> Result<f64> {
        let q = words(english);
        if q.is_empty() {
            return Ok(0.0);
        }
        let f: BTreeSet<String> = words(foreign).into_iter().collect();
        Ok(q.iter().filter(|w| f.contains(*w)).count() as f64 / q.len() as f64)
    }
}

/// Fixture cac: `english<TAB>foreign<TAB>value` lines. Texts compare
/// case-insensitively with whitespace collapsed; identical texts score 1
/// unless listed, every other unlisted pair scores 0.
#[derive(Debug, Clone, Default)]
pub struct TableCac {
    table: HashMap<(String, String), f64>,
}

fn key(s: &str) -> String {
    words(s).join(" ")
}

impl TableCac {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, english: &str, foreign: &str, value: f64) -> Self {
        self.table.insert((key(english), key(foreign)), value.clamp(0.0, 1.0));
        self
    }

    pub fn parse(src: &str, origin: &str) -> Result<Self> {
        let mut t = TableCac::new();
        for (n, line) in src.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [english, foreign, value] = fields.as_slice() else {
                return Err(Error::parse(origin, n + 1, "expected english<TAB>foreign<TAB>value"));
            };
            let v: f64 = value
                .trim()
                .parse()
                .ok()
                .filter(|v| (0.0..=1.0).contains(v))
                .ok_or_else(|| Error::parse(origin, n + 1, format!("value `{value}` not in [0, 1]")))?;
            t = t.with(english, foreign, v);
        }
        Ok(t)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&src, &path.display().to_string())
    }
}

impl Provider for TableCac {
    fn id(&self) -> &str {
        "table-cac"
    }
}

impl CacProvider for TableCac {
    fn cac(&self, english: &str, foreign: &str) -> Result<f64> {
        let k = (key(english), key(foreign));
        Ok(match self.table.get(&k) {
            Some(v) => *v,
            None if !k.0.is_empty() && k.0 == k.1 => 1.0,
            None => 0.0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scorers::HashedEmbeddings;

    #[test]
    fn embedding_cac_is_one_on_identical_text_and_bounded() {
        let cac = EmbeddingCac::new(Arc::new(HashedEmbeddings::new(64)));
        assert!((cac.cac("Russian oil", "russian oil!").unwrap() - 1.0).abs() < 1e-12);
        let v = cac.cac("cholera", "Floods displaced thousands").unwrap();
        assert!((0.0..=1.0).contains(&v));
        assert_eq!(cac.cac("...", "oil").unwrap(), 0.0);
    }

    #[test]
    fn lexical_overlap() {
        assert_eq!(LexicalCac.cac("cholera Iran", "Cholera spreads in Tehran").unwrap(), 0.5);
    }

    #[test]
    fn table_lookup() {
        let t = TableCac::parse("cholera\tvabā\t0.8\n", "fixture").unwrap();
        assert_eq!(t.cac("Cholera", "vabā").unwrap(), 0.8);
        assert_eq!(t.cac("Iran", "iran").unwrap(), 1.0);
        assert_eq!(t.cac("Iran", "Tehran").unwrap(), 0.0);
        assert!(TableCac::parse("a\tb\t1.5\n", "f").is_err());
    }
}
