//! Document extraction: tokenize, anchors, arguments, relations and
//! coreference, when/where, then (optionally) translation with projected
//! spans.

use std::sync::Arc;

use rayon::prelude::*;

use crate::align::{itermax, pool_words, project_span, unit_similarity, DEFAULT_ALPHA, DEFAULT_ITERATIONS};
use crate::document::{is_valid_language_tag, Document, LanguageClass, LanguageTable, RuleSplitter, Sentence, SentenceSplitter};
use crate::error::{Error, Result};
use crate::event::{node_id, EventMention};
use crate::extract::{extract_anchors, extract_arguments, extract_when_where};
use crate::index::{index_event, Gazetteer, IndexedEvent};
use crate::ontology::Ontology;
use crate::relations::{build_event_graph, decode_relations, merge_coreferent, AnchorRef, PairScores};
use crate::schema::{
    DocumentInfo, EventRecord, ExtractionResult, Projection, SentenceRecord, SpanText, TranslationRecord,
    TranslationStatus, EXTRACTION_FORMAT, EXTRACTION_VERSION,
};
use crate::scorers::ProviderRegistry;
use crate::span::Span;
use crate::tokenize::{tokenize, LabelStats, Subword};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignParams {
    pub iterations: usize,
    pub alpha: f64,
}

impl Default for AlignParams {
    fn default() -> Self {
        AlignParams {
            iterations: DEFAULT_ITERATIONS,
            alpha: DEFAULT_ALPHA,
        }
    }
}

impl AlignParams {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config("itermax needs iterations >= 1 and 0 < alpha < 1".into()));
        }
        Ok(())
    }
}

pub struct Pipeline {
    pub ontology: Arc<Ontology>,
    pub providers: ProviderRegistry,
    pub splitter: Box<dyn SentenceSplitter>,
    pub languages: LanguageTable,
    pub label_stats: LabelStats,
    pub align: AlignParams,
}

struct SentenceEvents {
    events: Vec<EventMention>,
    /// Related-event edges between indices of `events`.
    edges: Vec<(usize, usize)>,
}

impl Pipeline {
    pub fn new(ontology: Arc<Ontology>, providers: ProviderRegistry) -> Self {
        Pipeline {
            ontology,
            providers,
            splitter: Box::new(RuleSplitter),
            languages: LanguageTable::default(),
            label_stats: LabelStats::default(),
            align: AlignParams::default(),
        }
    }

    pub fn check_language(&self, language: &str) -> Result<()> {
        if !is_valid_language_tag(language) || !self.providers.supports_language(language) {
            return Err(Error::UnsupportedLanguage(language.to_string()));
        }
        Ok(())
    }

    fn tokens(&self, sentence: &Sentence, class: LanguageClass) -> Result<Vec<Subword>> {
        tokenize(sentence, &*self.providers.tokenizer.get(), class)
    }

    fn sentence_events(&self, sentence: &Sentence, class: LanguageClass) -> Result<SentenceEvents> {
        let tokens = self.tokens(sentence, class)?;
        let p = &self.providers;
        let anchors = extract_anchors(sentence, &tokens, &*p.anchor_scorer.get(), class, &self.label_stats)?;
        let mut events = Vec::with_capacity(anchors.len());
        for a in &anchors {
            let e = EventMention::new(a.event_type.clone(), vec![a.span], a.confidence, sentence.index)?;
            let args = extract_arguments(sentence, &tokens, &e, &self.ontology, &*p.argument_scorer.get(), class)?;
            events.push(e.with_arguments(args)?);
        }

        let refs: Vec<AnchorRef> = anchors
            .iter()
            .map(|a| AnchorRef {
                span: a.span,
                event_type: a.event_type.clone(),
            })
            .collect();
        let scores = if refs.len() < 2 {
            PairScores::uniform_none(refs.len(), 1.0)
        } else {
            p.pair_scorer.get().score(sentence, &tokens, &refs)?
        };
        let decoded = decode_relations(&refs, &scores)?;
        let merged = merge_coreferent(&events, &decoded.classes)?;

        let mut out = Vec::with_capacity(merged.len());
        for e in merged {
            let (when, where_) = extract_when_where(sentence, &tokens, &e, &*p.qa_scorer.get(), class)?;
            out.push(e.with_when(when)?.with_where(where_)?);
        }
        Ok(SentenceEvents {
            events: out,
            edges: decoded.edges,
        })
    }

    /// Extract events without translation.
    pub fn extract_document(&self, doc: &Document) -> Result<ExtractionResult> {
        self.check_language(&doc.language)?;
        let class = self.languages.class_of(&doc.language);
        let per_sentence: Vec<SentenceEvents> = doc
            .sentences
            .par_iter()
            .map(|s| self.sentence_events(s, class))
            .collect::<Result<_>>()?;

        let mut all_events = Vec::new();
        let mut all_edges = Vec::new();
        let mut sentences = Vec::with_capacity(doc.sentences.len());
        for (s, se) in doc.sentences.iter().zip(per_sentence) {
            let base = all_events.len();
            all_edges.extend(se.edges.iter().map(|(a, b)| (a + base, b + base)));
            let records = se
                .events
                .iter()
                .enumerate()
                .map(|(j, e)| EventRecord::from_mention(node_id(s.index, j), e, &s.text))
                .collect();
            all_events.extend(se.events);
            sentences.push(SentenceRecord {
                index: s.index,
                char_base: s.char_base,
                text: s.text.clone(),
                events: records,
                translation: None,
            });
        }
        let graph = build_event_graph(&doc.sentences, &all_events, &all_edges)?;
        Ok(ExtractionResult {
            format: EXTRACTION_FORMAT.into(),
            version: EXTRACTION_VERSION,
            document: DocumentInfo {
                id: doc.id.clone(),
                language: doc.language.clone(),
                text: doc.text.clone(),
            },
            sentences,
            graph,
            providers: self.providers.ids(),
            translation_status: TranslationStatus::Pending,
        })
    }

    pub fn extract(&self, id: &str, language: &str, text: &str) -> Result<ExtractionResult> {
        let doc = Document::new(id, language, text, &*self.splitter)?;
        self.extract_document(&doc)
    }

    fn translate_sentence(&self, s: &SentenceRecord, language: &str, class: LanguageClass) -> Result<TranslationRecord> {
        let p = &self.providers;
        let english = p.translation.get().translate(&s.text, language)?;
        let mut record = TranslationRecord {
            text: english.clone(),
            projections: Vec::new(),
        };
        if english.trim().is_empty() {
            return Ok(record);
        }
        let source = Sentence {
            index: s.index,
            text: s.text.clone(),
            char_base: s.char_base,
        };
        let target = Sentence {
            index: s.index,
            text: english,
            char_base: 0,
        };
        let src_tokens = self.tokens(&source, class)?;
        let tgt_tokens = self.tokens(&target, LanguageClass::WhitespaceDelimited)?;
        let (src_vecs, tgt_vecs) = {
            let emb = p.embeddings.get();
            (emb.embed(&src_tokens, language)?, emb.embed(&tgt_tokens, "en")?)
        };
        let src_units = pool_words(&src_tokens, &src_vecs, class)?;
        let tgt_units = pool_words(&tgt_tokens, &tgt_vecs, LanguageClass::WhitespaceDelimited)?;
        let sim = unit_similarity(&src_units, &tgt_units)?;
        let alignment = itermax(&sim, self.align.iterations, self.align.alpha);
        let src_spans: Vec<Span> = src_units.iter().map(|u| u.span).collect();
        let tgt_spans: Vec<Span> = tgt_units.iter().map(|u| u.span).collect();

        let mut project = |event_id: &str, element: &str, start: usize, end: usize| -> Result<()> {
            let span = Span::new(start, end)?;
            record.projections.push(Projection {
                event_id: event_id.to_string(),
                element: element.to_string(),
                source: SpanText::new(span, &s.text),
                target: project_span(span, &src_spans, &tgt_spans, &alignment)
                    .map(|t| SpanText::new(t, &target.text)),
            });
            Ok(())
        };
        for e in &s.events {
            for a in &e.anchors {
                project(&e.id, "anchor", a.start, a.end)?;
            }
            for a in &e.arguments {
                project(&e.id, &a.role, a.start, a.end)?;
            }
            if let Some(w) = &e.when {
                project(&e.id, "when", w.start, w.end)?;
            }
            if let Some(w) = &e.where_ {
                project(&e.id, "where", w.start, w.end)?;
            }
        }
        Ok(record)
    }

    /// Fill in translations and projections. A translation failure leaves
    /// the result untranslated with status `unavailable`.
    pub fn translate(&self, result: &mut ExtractionResult) {
        let language = result.document.language.clone();
        let class = self.languages.class_of(&language);
        let translated: Result<Vec<TranslationRecord>> = result
            .sentences
            .par_iter()
            .map(|s| self.translate_sentence(s, &language, class))
            .collect();
        match translated {
            Ok(records) => {
                for (s, t) in result.sentences.iter_mut().zip(records) {
                    s.translation = Some(t);
                }
                result.translation_status = TranslationStatus::Done;
            }
            Err(e) => {
                tracing::warn!(document = %result.document.id, error = %e, "translation failed");
                result.translation_status = TranslationStatus::Unavailable;
            }
        }
    }
}

/// Searchable records for every event of `result`.
pub fn index_result(result: &ExtractionResult, gazetteer: &Gazetteer) -> Result<Vec<IndexedEvent>> {
    let mut out = Vec::new();
    for s in &result.sentences {
        for e in &s.events {
            let mention = e.to_mention(s.index)?;
            out.push(index_event(
                &mention,
                &result.document.id,
                &e.id,
                &s.text,
                s.translation.as_ref().map(|t| t.text.as_str()),
                gazetteer,
            ));
        }
    }
    Ok(out)
}
