//! Decoding of anchors, arguments and when/where attachments from scorer
//! outputs.

mod argument_input;
mod bio;
mod qa;
mod tagset;

pub use argument_input::{
    build_argument_input, ArgumentInput, InputItem, CLOSE_MARK, END_OF_PREFIX, OPEN_MARK, SEPARATOR,
};
pub use bio::{decode_bio, DecodedSpan};
pub use qa::{Answer, QASpanScores, QaQuestion, QuestionKind};
pub use tagset::{LabelScoreMatrix, LabelScoreMatrixWire, Tag, TagKind, Tagset};

use crate::document::{LanguageClass, Sentence};
use crate::error::{Error, Result};
use crate::event::{Argument, Attachment, EventMention};
use crate::ontology::Ontology;
use crate::scorers::{AnchorScorer, ArgumentQuery, ArgumentScorer, QaScorer};
use crate::span::Span;
use crate::tokenize::{expand_in_chars, LabelStats, Subword};

/// An anchor decoded from the anchor scorer.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorCandidate {
    pub span: Span,
    pub event_type: String,
    pub confidence: f64,
}

pub fn extract_anchors(
    sentence: &Sentence,
    tokens: &[Subword],
    scorer: &dyn AnchorScorer,
    class: LanguageClass,
    stats: &LabelStats,
) -> Result<Vec<AnchorCandidate>> {
    let scores = scorer.score(sentence, tokens)?;
    let stats = stats
        .clone()
        .with_labels(scores.tagset().names().iter().map(String::as_str));
    let chars: Vec<char> = sentence.text.chars().collect();
    bio::decode_words(&scores, tokens, &chars, class, &stats)?
        .into_iter()
        .map(|d| {
            let event_type = d
                .label
                .ok_or_else(|| Error::UnknownLabel("untyped anchor tag".into()))?;
            Ok(AnchorCandidate {
                span: d.span,
                event_type,
                confidence: d.confidence,
            })
        })
        .collect()
}

/// Tag fillers for every span role of the ontology, one role at a time,
/// conditioned on the event's first anchor.
pub fn extract_arguments(
    sentence: &Sentence,
    tokens: &[Subword],
    event: &EventMention,
    ontology: &Ontology,
    scorer: &dyn ArgumentScorer,
    class: LanguageClass,
) -> Result<Vec<Argument>> {
    let anchor = event.first_anchor();
    let anchor_text = anchor.slice(&sentence.text);
    let chars: Vec<char> = sentence.text.chars().collect();
    let mut out = Vec::new();
    for (role, role_id) in ontology.span_roles() {
        let input = build_argument_input(tokens, anchor, role_id, anchor_text)?;
        let scores = scorer.score(&ArgumentQuery {
            sentence,
            tokens,
            anchor,
            event_type: event.event_type(),
            role,
            role_id,
            input: &input,
        })?;
        if scores.rows() != input.items.len() {
            return Err(Error::ShapeMismatch {
                expected: input.items.len(),
                got: scores.rows(),
            });
        }
        let body = scores.select_rows(&input.token_rows());
        let stats = LabelStats::default().with_labels(body.tagset().names().iter().map(String::as_str));
        for d in bio::decode_words(&body, tokens, &chars, class, &stats)? {
            out.push(Argument::new(role, d.span, d.confidence)?);
        }
    }
    Ok(out)
}

/// Ask the when and where questions about the event's first anchor.
pub fn extract_when_where(
    sentence: &Sentence,
    tokens: &[Subword],
    event: &EventMention,
    scorer: &dyn QaScorer,
    class: LanguageClass,
) -> Result<(Option<Attachment>, Option<Attachment>)> {
    let anchor_text = event.first_anchor().slice(&sentence.text);
    let chars: Vec<char> = sentence.text.chars().collect();
    let ask = |kind| -> Result<Option<Attachment>> {
        let question = QaQuestion::new(kind, anchor_text, &sentence.text);
        let scores = scorer.score(sentence, tokens, &question)?;
        scores.check(tokens.len())?;
        Ok(scores.best_answer().map(|a| {
            let raw = tokens[a.start].span.cover(&tokens[a.end].span);
            Attachment {
                span: expand_in_chars(raw, &chars, class),
                confidence: a.confidence,
            }
        }))
    };
    let when = ask(QuestionKind::When)?;
    let where_ = ask(QuestionKind::Where)?;
    Ok((when, where_))
}
