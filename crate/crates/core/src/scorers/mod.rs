//! Provider contracts around every learned component, plus deterministic
//! implementations for tests and model-free demos.
//!
//! Each provider declares an identity string (recorded in outputs) and
//! whether it tolerates concurrent calls. Providers that do not are wrapped
//! by the registry so calls to them are serialized.

mod cac;
mod embedding;
pub mod remote;
mod rules;
mod translate;

use std::collections::BTreeMap;
use std::ops::Deref;
use std::sync::{Arc, Mutex, MutexGuard};

pub(crate) use cac::words;
pub use cac::{EmbeddingCac, LexicalCac, TableCac};
pub use embedding::{hashed_embedding, GlossEmbeddings, HashedEmbeddings, TableEmbeddings};
pub use rules::{load_rule_scorer, RuleScorers, RuleSet};
pub use translate::{DictionaryTranslator, IdentityTranslator};

use crate::document::{LanguageClass, Sentence};
use crate::error::Result;
use crate::extract::{ArgumentInput, LabelScoreMatrix, QASpanScores, QaQuestion};
use crate::relations::{AnchorRef, PairScores};
use crate::span::Span;
use crate::tokenize::{RuleTokenizer, Subword};

pub trait Provider: Send + Sync {
    fn id(&self) -> &str;

    /// Whether the provider may be called from several threads at once.
    fn concurrent(&self) -> bool {
        true
    }

    fn supports_language(&self, _language: &str) -> bool {
        true
    }
}

pub trait SubwordTokenizer: Provider {
    fn tokenize(&self, text: &str, class: LanguageClass) -> Result<Vec<Subword>>;
}

/// Scores every BIO tag for every sentence token.
pub trait AnchorScorer: Provider {
    fn score(&self, sentence: &Sentence, tokens: &[Subword]) -> Result<LabelScoreMatrix>;
}

/// Everything an argument scorer may look at for one (anchor, role) query.
#[derive(Debug, Clone, Copy)]
pub struct ArgumentQuery<'a> {
    pub sentence: &'a Sentence,
    pub tokens: &'a [Subword],
    pub anchor: Span,
    pub event_type: &'a str,
    pub role: &'a str,
    pub role_id: u32,
    pub input: &'a ArgumentInput,
}

/// Scores `O`/`B`/`I` for each item of the marked input sequence; the result
/// has one row per input item.
pub trait ArgumentScorer: Provider {
    fn score(&self, query: &ArgumentQuery<'_>) -> Result<LabelScoreMatrix>;
}

pub trait PairScorer: Provider {
    fn score(&self, sentence: &Sentence, tokens: &[Subword], anchors: &[AnchorRef]) -> Result<PairScores>;
}

pub trait QaScorer: Provider {
    fn score(&self, sentence: &Sentence, tokens: &[Subword], question: &QaQuestion) -> Result<QASpanScores>;
}

pub trait EmbeddingProvider: Provider {
    fn dimension(&self) -> usize;
    /// One vector per token.
    fn embed(&self, tokens: &[Subword], language: &str) -> Result<Vec<Vec<f64>>>;
}

pub trait TranslationProvider: Provider {
    fn translate(&self, text: &str, source_language: &str) -> Result<String>;
}

/// Likelihood in `[0, 1]` that `foreign` conveys the meaning of `english`.
pub trait CacProvider: Provider {
    fn cac(&self, english: &str, foreign: &str) -> Result<f64>;
}

/// A provider handle that serializes calls when the provider is not
/// declared concurrent.
pub struct Slot<T: ?Sized> {
    inner: Arc<T>,
    gate: Option<Mutex<()>>,
}

pub struct SlotGuard<'a, T: ?Sized> {
    inner: &'a T,
    _lock: Option<MutexGuard<'a, ()>>,
}

impl<T: ?Sized> Deref for SlotGuard<'_, T> {
    type Target = T;
    fn deref(&self) -> &T {
        self.inner
    }
}

impl<T: ?Sized + Provider> Slot<T> {
    pub fn new(inner: Arc<T>) -> Self {
        let gate = (!inner.concurrent()).then(|| Mutex::new(()));
        Slot { inner, gate }
    }

    pub fn get(&self) -> SlotGuard<'_, T> {
        SlotGuard {
            inner: &self.inner,
            _lock: self
                .gate
                .as_ref()
                .map(|m| m.lock().unwrap_or_else(|p| p.into_inner())),
        }
    }

    pub fn id(&self) -> &str {
        self.inner.id()
    }

    pub fn is_serialized(&self) -> bool {
        self.gate.is_some()
    }
}

/// The full set of providers a pipeline runs with.
pub struct ProviderRegistry {
    pub tokenizer: Slot<dyn SubwordTokenizer>,
    pub anchor_scorer: Slot<dyn AnchorScorer>,
    pub argument_scorer: Slot<dyn ArgumentScorer>,
    pub pair_scorer: Slot<dyn PairScorer>,
    pub qa_scorer: Slot<dyn QaScorer>,
    pub embeddings: Slot<dyn EmbeddingProvider>,
    pub translation: Slot<dyn TranslationProvider>,
    pub cac: Slot<dyn CacProvider>,
}

impl ProviderRegistry {
    /// Rule scorers for extraction, the reference tokenizer, hashed
    /// embeddings, identity translation and embedding-based cac.
    pub fn from_rules(rules: Arc<RuleScorers>) -> Self {
        let embeddings = Arc::new(HashedEmbeddings::new(64));
        ProviderRegistry {
            tokenizer: Slot::new(Arc::new(RuleTokenizer::default())),
            anchor_scorer: Slot::new(rules.clone()),
            argument_scorer: Slot::new(rules.clone()),
            pair_scorer: Slot::new(rules.clone()),
            qa_scorer: Slot::new(rules),
            embeddings: Slot::new(embeddings.clone()),
            translation: Slot::new(Arc::new(IdentityTranslator)),
            cac: Slot::new(Arc::new(EmbeddingCac::new(embeddings))),
        }
    }

    pub fn with_tokenizer(mut self, t: Arc<dyn SubwordTokenizer>) -> Self {
        self.tokenizer = Slot::new(t);
        self
    }

    pub fn with_embeddings(mut self, e: Arc<dyn EmbeddingProvider>) -> Self {
        self.embeddings = Slot::new(e);
        self
    }

    pub fn with_translation(mut self, t: Arc<dyn TranslationProvider>) -> Self {
        self.translation = Slot::new(t);
        self
    }

    pub fn with_cac(mut self, c: Arc<dyn CacProvider>) -> Self {
        self.cac = Slot::new(c);
        self
    }

    pub fn with_anchor_scorer(mut self, s: Arc<dyn AnchorScorer>) -> Self {
        self.anchor_scorer = Slot::new(s);
        self
    }

    pub fn with_argument_scorer(mut self, s: Arc<dyn ArgumentScorer>) -> Self {
        self.argument_scorer = Slot::new(s);
        self
    }

    pub fn with_pair_scorer(mut self, s: Arc<dyn PairScorer>) -> Self {
        self.pair_scorer = Slot::new(s);
        self
    }

    pub fn with_qa_scorer(mut self, s: Arc<dyn QaScorer>) -> Self {
        self.qa_scorer = Slot::new(s);
        self
    }

    /// Provider identity strings keyed by slot name.
    pub fn ids(&self) -> BTreeMap<String, String> {
        [
            ("tokenizer", self.tokenizer.id()),
            ("anchor_scorer", self.anchor_scorer.id()),
            ("argument_scorer", self.argument_scorer.id()),
            ("pair_scorer", self.pair_scorer.id()),
            ("qa_scorer", self.qa_scorer.id()),
            ("embeddings", self.embeddings.id()),
            ("translation", self.translation.id()),
            ("cac", self.cac.id()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
    }

    /// Whether every extraction provider accepts `language`.
    pub fn supports_language(&self, language: &str) -> bool {
        self.anchor_scorer.get().supports_language(language)
            && self.argument_scorer.get().supports_language(language)
            && self.pair_scorer.get().supports_language(language)
            && self.qa_scorer.get().supports_language(language)
            && self.embeddings.get().supports_language(language)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    struct Counting {
        active: AtomicUsize,
        max_seen: AtomicUsize,
    }

    impl Provider for Counting {
        fn id(&self) -> &str {
            "counting"
        }
        fn concurrent(&self) -> bool {
            false
        }
    }

    impl TranslationProvider for Counting {
        fn translate(&self, text: &str, _: &str) -> Result<String> {
            let now = self.active.fetch_add(1, Ordering::SeqCst) + 1;
            self.max_seen.fetch_max(now, Ordering::SeqCst);
            std::thread::sleep(std::time::Duration::from_millis(2));
            self.active.fetch_sub(1, Ordering::SeqCst);
            Ok(text.to_string())
        }
    }

    #[test]
    fn single_call_providers_are_serialized() {
        let p = Arc::new(Counting {
            active: AtomicUsize::new(0),
            max_seen: AtomicUsize::new(0),
        });
        let slot: Slot<dyn TranslationProvider> = Slot::new(p.clone());
        assert!(slot.is_serialized());
        std::thread::scope(|s| {
            for _ in 0..8 {
                s.spawn(|| {
                    for _ in 0..5 {
                        slot.get().translate("x", "en").unwrap();
                    }
                });
            }
        });
        assert_eq!(p.max_seen.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn registry_reports_ids() {
        let rules = Arc::new(RuleScorers::new(
            RuleSet::parse("", "mem").unwrap(),
            ["Protest"],
        ));
        let reg = ProviderRegistry::from_rules(rules);
        let ids = reg.ids();
        assert_eq!(ids.len(), 8);
        assert_eq!(ids["translation"], "identity-translation");
        assert!(reg.supports_language("pl"));
    }
}
