//! Half-open character spans and the interval algebra used by decoding,
//! evaluation and projection.
//!
//! Offsets count Unicode scalar values, never bytes.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A half-open `[start, end)` range of character offsets within one sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Span {
    start: usize,
    end: usize,
}

#[derive(Deserialize)]
struct RawSpan {
    start: usize,
    end: usize,
}

impl<'de> Deserialize<'de> for Span {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawSpan::deserialize(d)?;
        Span::new(raw.start, raw.end).map_err(serde::de::Error::custom)
    }
}

impl Span {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start < end {
            Ok(Span { start, end })
        } else {
            Err(Error::InvalidSpan { start, end })
        }
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// Smallest span covering both.
    pub fn cover(&self, other: &Span) -> Span {
        Span {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }

    /// Slice `text` by character offsets. Out-of-range ends are clamped.
    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        let byte_at = |n: usize| text.char_indices().nth(n).map_or(text.len(), |(b, _)| b);
        &text[byte_at(self.start)..byte_at(self.end)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpanRelation {
    Disjoint,
    Overlapping,
    Equal,
    /// `a` strictly contains `b`.
    Contains,
    /// `a` is strictly contained in `b`.
    Contained,
}

pub fn span_relation(a: Span, b: Span) -> SpanRelation {
    if a == b {
        SpanRelation::Equal
    } else if !a.overlaps(&b) {
        SpanRelation::Disjoint
    } else if a.contains(&b) {
        SpanRelation::Contains
    } else if b.contains(&a) {
        SpanRelation::Contained
    } else {
        SpanRelation::Overlapping
    }
}

/// Union of `spans` as a sorted list of maximal spans. Touching spans merge.
pub fn merge_spans(spans: &[Span]) -> Vec<Span> {
    let mut sorted = spans.to_vec();
    sorted.sort_by(|a, b| match a.start.cmp(&b.start) {
        Ordering::Equal => a.end.cmp(&b.end),
        o => o,
    });
    let mut out: Vec<Span> = Vec::with_capacity(sorted.len());
    for s in sorted {
        match out.last_mut() {
            Some(last) if s.start <= last.end => last.end = last.end.max(s.end),
            _ => out.push(s),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sp(a: usize, b: usize) -> Span {
        Span::new(a, b).unwrap()
    }

    #[test]
    fn relation_examples() {
        assert_eq!(span_relation(sp(0, 6), sp(0, 6)), SpanRelation::Equal);
        assert_eq!(span_relation(sp(0, 6), sp(7, 10)), SpanRelation::Disjoint);
        assert_eq!(span_relation(sp(0, 6), sp(4, 10)), SpanRelation::Overlapping);
        assert_eq!(span_relation(sp(0, 6), sp(6, 10)), SpanRelation::Disjoint);
        assert_eq!(span_relation(sp(0, 6), sp(1, 3)), SpanRelation::Contains);
        assert_eq!(span_relation(sp(1, 3), sp(0, 6)), SpanRelation::Contained);
    }

    #[test]
    fn merge_examples() {
        assert_eq!(merge_spans(&[sp(0, 4), sp(4, 6)]), vec![sp(0, 6)]);
        assert_eq!(merge_spans(&[sp(0, 4)]), vec![sp(0, 4)]);
        assert_eq!(
            merge_spans(&[sp(0, 4), sp(8, 9), sp(2, 5)]),
            vec![sp(0, 5), sp(8, 9)]
        );
        assert!(merge_spans(&[]).is_empty());
    }

    #[test]
    fn rejects_empty_span() {
        assert!(Span::new(3, 3).is_err());
        assert!(Span::new(4, 3).is_err());
        assert!(serde_json::from_str::<Span>(r#"{"start":5,"end":2}"#).is_err());
    }

    #[test]
    fn slice_counts_chars() {
        let text = "Zürich 石油 oil";
        assert_eq!(sp(7, 9).slice(text), "石油");
        assert_eq!(sp(10, 13).slice(text), "oil");
    }

    fn arb_span() -> impl Strategy<Value = Span> {
        (0usize..40, 1usize..15).prop_map(|(s, l)| sp(s, s + l))
    }

    fn covered(spans: &[Span]) -> std::collections::BTreeSet<usize> {
        spans.iter().flat_map(|s| s.start..s.end).collect()
    }

    proptest! {
        #[test]
        fn relation_symmetry(a in arb_span(), b in arb_span()) {
            let ab = span_relation(a, b);
            let ba = span_relation(b, a);
            let expected = match ab {
                SpanRelation::Contains => SpanRelation::Contained,
                SpanRelation::Contained => SpanRelation::Contains,
                r => r,
            };
            prop_assert_eq!(ba, expected);
            prop_assert_eq!(ab == SpanRelation::Equal, a.contains(&b) && b.contains(&a));
        }

        #[test]
        fn merge_idempotent_and_order_free(mut spans in prop::collection::vec(arb_span(), 0..10)) {
            let merged = merge_spans(&spans);
            prop_assert_eq!(merge_spans(&merged), merged.clone());
            spans.reverse();
            prop_assert_eq!(merge_spans(&spans), merged.clone());
            prop_assert_eq!(covered(&merged), covered(&spans));
            for w in merged.windows(2) {
                prop_assert!(w[0].end < w[1].start);
            }
        }
    }
}
