//! BIO decoding from per-token label scores.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::tagset::{LabelScoreMatrix, TagKind, Tagset};
use crate::document::LanguageClass;
use crate::error::{Error, Result};
use crate::span::Span;
use crate::tokenize::{expand_in_chars, resolve_word_label, word_units, LabelStats, Subword};

/// A decoded typed span. `label` is the event type (or role) of the span,
/// or `None` for an untyped `B`/`I` tagset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodedSpan {
    pub span: Span,
    pub label: Option<String>,
    pub confidence: f64,
    /// Token indices the span was decoded from.
    pub tokens: Range<usize>,
}

/// Group a label sequence into maximal typed spans.
///
/// `B-t` opens a span; `I-t` continues an open span of type `t` and
/// otherwise opens a new one; `O` closes. Returns unit ranges with their
/// label and the mean of the per-unit probabilities.
pub(crate) fn segment(
    labels: &[(usize, f64)],
    tagset: &Tagset,
) -> Vec<(Range<usize>, Option<String>, f64)> {
    let mut out: Vec<(Range<usize>, Option<String>, f64)> = Vec::new();
    let mut open: Option<(usize, &Option<String>, f64)> = None;
    let close = |open: &mut Option<(usize, &Option<String>, f64)>, end: usize, out: &mut Vec<_>| {
        if let Some((start, label, sum)) = open.take() {
            out.push((start..end, label.clone(), sum / (end - start) as f64));
        }
    };
    for (i, &(t, p)) in labels.iter().enumerate() {
        let tag = tagset.tag(t);
        match tag.kind {
            TagKind::Outside => close(&mut open, i, &mut out),
            TagKind::Inside if matches!(open, Some((_, l, _)) if *l == tag.label) => {
                if let Some((_, _, sum)) = open.as_mut() {
                    *sum += p;
                }
            }
            TagKind::Begin | TagKind::Inside => {
                close(&mut open, i, &mut out);
                open = Some((i, &tag.label, p));
            }
        }
    }
    close(&mut open, labels.len(), &mut out);
    out
}

/// Decode maximal spans from per-token argmax labels. Confidence is the
/// mean softmax probability of the chosen labels over the span.
pub fn decode_bio(scores: &LabelScoreMatrix, tokens: &[Subword]) -> Result<Vec<DecodedSpan>> {
    if scores.rows() != tokens.len() {
        return Err(Error::ShapeMismatch {
            expected: tokens.len(),
            got: scores.rows(),
        });
    }
    let labels: Vec<(usize, f64)> = (0..scores.rows())
        .map(|i| {
            let t = scores.argmax(i);
            (t, scores.probability(i, t))
        })
        .collect();
    Ok(segment(&labels, scores.tagset())
        .into_iter()
        .map(|(r, label, confidence)| DecodedSpan {
            span: tokens[r.start].span.cover(&tokens[r.end - 1].span),
            label,
            confidence,
            tokens: r,
        })
        .collect())
}

/// Word-level decoding used by the extraction pipeline: subword labels are
/// resolved to one label per word, words are segmented, and the resulting
/// spans are widened to word boundaries.
pub(crate) fn decode_words(
    scores: &LabelScoreMatrix,
    tokens: &[Subword],
    chars: &[char],
    class: LanguageClass,
    stats: &LabelStats,
) -> Result<Vec<DecodedSpan>> {
    if scores.rows() != tokens.len() {
        return Err(Error::ShapeMismatch {
            expected: tokens.len(),
            got: scores.rows(),
        });
    }
    let tagset = scores.tagset();
    let units = word_units(tokens, class);
    let mut labels = Vec::with_capacity(units.len());
    for u in &units {
        let tag = if u.len() == 1 {
            scores.argmax(u.start)
        } else {
            let names: Vec<&str> = u.clone().map(|i| tagset.name(scores.argmax(i))).collect();
            let resolved = resolve_word_label(&names, stats)?;
            tagset
                .position(&resolved)
                .ok_or(Error::UnknownLabel(resolved))?
        };
        let p = u.clone().map(|i| scores.probability(i, tag)).sum::<f64>() / u.len() as f64;
        labels.push((tag, p));
    }
    Ok(segment(&labels, tagset)
        .into_iter()
        .map(|(r, label, confidence)| {
            let first = units[r.start].start;
            let last = units[r.end - 1].end - 1;
            let raw = tokens[first].span.cover(&tokens[last].span);
            DecodedSpan {
                span: expand_in_chars(raw, chars, class),
                label,
                confidence,
                tokens: first..last + 1,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::document::Sentence;
    use crate::scorers::SubwordTokenizer;
    use crate::tokenize::{tokenize, RuleTokenizer};

    fn words(text: &str) -> Vec<Subword> {
        let s = Sentence {
            index: 0,
            text: text.into(),
            char_base: 0,
        };
        tokenize(&s, &RuleTokenizer::new(None), LanguageClass::WhitespaceDelimited).unwrap()
    }

    fn one_hot(ts: &Arc<Tagset>, labels: &[&str]) -> LabelScoreMatrix {
        let rows = labels
            .iter()
            .map(|l| {
                let mut r = vec![0.0; ts.len()];
                r[ts.position(l).unwrap()] = 4.0;
                r
            })
            .collect();
        LabelScoreMatrix::new(ts.clone(), rows).unwrap()
    }

    #[test]
    fn all_outside_yields_nothing() {
        let ts = Arc::new(Tagset::for_event_types(["Protest"]));
        let toks = words("mass protests erupted");
        let m = one_hot(&ts, &["O", "O", "O"]);
        assert!(decode_bio(&m, &toks).unwrap().is_empty());
    }

    #[test]
    fn begin_inside_forms_one_span() {
        let ts = Arc::new(Tagset::for_event_types(["Protest"]));
        let toks = words("mass protests erupted");
        let m = one_hot(&ts, &["B-Protest", "I-Protest", "O"]);
        let d = decode_bio(&m, &toks).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].tokens, 0..2);
        assert_eq!(d[0].span, Span::new(0, 13).unwrap());
        assert_eq!(d[0].label.as_deref(), Some("Protest"));
        // One-hot 4.0 over 3 tags: e^4 / (e^4 + 2).
        let p = 4f64.exp() / (4f64.exp() + 2.0);
        assert!((d[0].confidence - p).abs() < 1e-12);
    }

    #[test]
    fn mismatched_inside_starts_new_span() {
        let ts = Arc::new(Tagset::for_event_types(["Attack", "Protest"]));
        let toks = words("mass protests erupted");
        let m = one_hot(&ts, &["B-Attack", "I-Protest", "O"]);
        let d = decode_bio(&m, &toks).unwrap();
        let got: Vec<_> = d.iter().map(|s| (s.tokens.clone(), s.label.clone().unwrap())).collect();
        assert_eq!(got, vec![(0..1, "Attack".to_string()), (1..2, "Protest".to_string())]);
    }

    #[test]
    fn leading_inside_and_untyped_tags() {
        let ts = Arc::new(Tagset::for_role());
        let toks = words("a b c d");
        let m = one_hot(&ts, &["I", "I", "O", "B"]);
        let d = decode_bio(&m, &toks).unwrap();
        let got: Vec<_> = d.iter().map(|s| s.tokens.clone()).collect();
        assert_eq!(got, vec![0..2, 3..4]);
        assert!(d.iter().all(|s| s.label.is_none()));
    }

    #[test]
    fn row_count_must_match() {
        let ts = Arc::new(Tagset::for_role());
        let m = one_hot(&ts, &["O"]);
        assert!(decode_bio(&m, &words("a b")).is_err());
    }

    #[test]
    fn word_decoding_expands_partial_words() {
        let text = "Floods displaced thousands";
        let s = Sentence {
            index: 0,
            text: text.into(),
            char_base: 0,
        };
        let tok = RuleTokenizer::default().with_lexicon(["displaced", "thousands"]);
        let toks = tok.tokenize(text, LanguageClass::WhitespaceDelimited).unwrap();
        let ts = Arc::new(Tagset::for_event_types(["Disaster"]));
        let m = one_hot(&ts, &["B-Disaster", "O", "O", "O"]);
        let stats = LabelStats::default().with_labels(ts.names().iter().map(String::as_str));
        let chars: Vec<char> = s.text.chars().collect();
        let d = decode_words(&m, &toks, &chars, LanguageClass::WhitespaceDelimited, &stats).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].span.slice(text), "Floods");
        assert_eq!(d[0].tokens, 0..2);
    }
}
