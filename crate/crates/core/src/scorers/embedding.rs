//! Deterministic token embeddings.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use super::{DictionaryTranslator, EmbeddingProvider, Provider};
use crate::document::{primary_subtag, LanguageClass};
use crate::error::{Error, Result};
use crate::tokenize::{word_units, Subword};

/// Pseudo-random unit vector seeded by the SHA-256 of `token`'s bytes.
///
/// # Panics
///
/// If `dimension < 8`.
pub fn hashed_embedding(token: &str, dimension: usize) -> Vec<f64> {
    assert!(dimension >= 8, "hashed embeddings need at least 8 dimensions");
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&Sha256::digest(token.as_bytes()));
    let mut rng = ChaCha8Rng::from_seed(seed);
    let mut v: Vec<f64> = (0..dimension).map(|_| rng.sample(StandardNormal)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut v {
        *x /= norm;
    }
    v
}

/// Hashed embedding of each token's lowercased text.
#[derive(Debug, Clone)]
pub struct HashedEmbeddings {
    dimension: usize,
    id: String,
}

impl HashedEmbeddings {
    /// # Panics
    ///
    /// If `dimension < 8`.
    pub fn new(dimension: usize) -> Self {
        assert!(dimension >= 8, "hashed embeddings need at least 8 dimensions");
        HashedEmbeddings {
            dimension,
            id: format!("hashed-embeddings/d={dimension}"),
        }
    }
}

impl Provider for HashedEmbeddings {
    fn id(&self) -> &str {
        &self.id
    }
}

impl EmbeddingProvider for HashedEmbeddings {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, tokens: &[Subword], _language: &str) -> Result<Vec<Vec<f64>>> {
        Ok(tokens
            .iter()
            .map(|t| hashed_embedding(&t.text.to_lowercase(), self.dimension))
            .collect())
    }
}

/// Word-level hashed embeddings of dictionary glosses. Each word of a
/// non-English text is embedded as its English entry (or itself when
/// absent), so a word and its dictionary translation get the same vector.
/// Every subword of a word receives the word's vector.
#[derive(Debug, Clone)]
pub struct GlossEmbeddings {
    dictionary: Arc<DictionaryTranslator>,
    dimension: usize,
    id: String,
}

impl GlossEmbeddings {
    /// # Panics
    ///
    /// If `dimension < 8`.
    pub fn new(dictionary: Arc<DictionaryTranslator>, dimension: usize) -> Self {
        assert!(dimension >= 8, "hashed embeddings need at least 8 dimensions");
        GlossEmbeddings {
            dictionary,
            dimension,
            id: format!("gloss-embeddings/d={dimension}"),
        }
    }
}

impl Provider for GlossEmbeddings {
    fn id(&self) -> &str {
        &self.id
    }
}

impl EmbeddingProvider for GlossEmbeddings {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, tokens: &[Subword], language: &str) -> Result<Vec<Vec<f64>>> {
        let english = primary_subtag(language) == "en";
        let mut out = vec![Vec::new(); tokens.len()];
        for unit in word_units(tokens, LanguageClass::WhitespaceDelimited) {
            let word: String = tokens[unit.clone()].iter().map(|t| t.text.as_str()).collect();
            let word = word.to_lowercase();
            let key = match self.dictionary.gloss(&word) {
                Some(g) if !english => g.to_lowercase(),
                _ => word,
            };
            let v = hashed_embedding(&key, self.dimension);
            for slot in &mut out[unit] {
                *slot = v.clone();
            }
        }
        Ok(out)
    }
}

/// Fixture embeddings read from a text file:
///
/// ```text
/// dimension	4
/// oil	0.1 0.2 0.3 0.4
/// ```
///
/// Tokens missing from the table fall back to their hashed embedding.
#[derive(Debug, Clone)]
pub struct TableEmbeddings {
    dimension: usize,
    vectors: HashMap<String, Vec<f64>>,
    id: String,
}

impl TableEmbeddings {
    pub fn parse(src: &str, origin: &str) -> Result<Self> {
        let mut lines = src
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
        let (n, header) = lines
            .next()
            .ok_or_else(|| Error::parse(origin, 1, "missing `dimension` header"))?;
        let dimension: usize = header
            .strip_prefix("dimension\t")
            .and_then(|d| d.trim().parse().ok())
            .filter(|d| *d >= 8)
            .ok_or_else(|| Error::parse(origin, n + 1, "expected `dimension<TAB>N` with N >= 8"))?;
        let mut vectors = HashMap::new();
        for (n, line) in lines {
            let (token, values) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(origin, n + 1, "expected token<TAB>vector"))?;
            let v: Vec<f64> = values
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::parse(origin, n + 1, format!("bad number: {e}")))?;
            if v.len() != dimension {
                return Err(Error::parse(
                    origin,
                    n + 1,
                    format!("vector has {} values, header says {dimension}", v.len()),
                ));
            }
            vectors.insert(token.to_string(), v);
        }
        Ok(TableEmbeddings {
            dimension,
            vectors,
            id: format!("table-embeddings/{origin}"),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&src, &path.display().to_string())
    }
}

impl Provider for TableEmbeddings {
    fn id(&self) -> &str {
        &self.id
    }
}

impl EmbeddingProvider for TableEmbeddings {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, tokens: &[Subword], _language: &str) -> Result<Vec<Vec<f64>>> {
        Ok(tokens
            .iter()
            .map(|t| {
                self.vectors
                    .get(&t.text)
                    .cloned()
                    .unwrap_or_else(|| hashed_embedding(&t.text.to_lowercase(), self.dimension))
            })
            .collect())
    }
}
