//! Anchor- and role-conditioned input sequences for argument tagging.
//!
//! For anchor `displaced` and role id 1 the sequence reads
//! `displaced ; 1 </s> Floods < displaced > thousands last month`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::span::Span;
use crate::tokenize::Subword;

pub const SEPARATOR: &str = ";";
pub const END_OF_PREFIX: &str = "</s>";
pub const OPEN_MARK: &str = "<";
pub const CLOSE_MARK: &str = ">";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputItem {
    pub text: String,
    /// Index of the sentence token this item copies; `None` for prefix
    /// items and markers.
    pub token: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgumentInput {
    pub items: Vec<InputItem>,
}

impl ArgumentInput {
    /// Items joined by single spaces.
    pub fn render(&self) -> String {
        let texts: Vec<&str> = self.items.iter().map(|i| i.text.as_str()).collect();
        texts.join(" ")
    }

    /// Positions of the items that copy sentence tokens, in token order.
    pub fn token_rows(&self) -> Vec<usize> {
        self.items
            .iter()
            .enumerate()
            .filter(|(_, i)| i.token.is_some())
            .map(|(p, _)| p)
            .collect()
    }

    /// The sentence tokens with prefix and markers removed.
    pub fn sentence_tokens(&self) -> Vec<&str> {
        self.items
            .iter()
            .filter(|i| i.token.is_some())
            .map(|i| i.text.as_str())
            .collect()
    }
}

/// Token index range exactly covering `anchor`, or an error if the anchor
/// starts or ends inside a token.
pub(crate) fn anchor_token_range(tokens: &[Subword], anchor: Span) -> Result<std::ops::Range<usize>> {
    let unaligned = || Error::UnalignedAnchor {
        start: anchor.start(),
        end: anchor.end(),
    };
    if tokens
        .iter()
        .any(|t| t.span.overlaps(&anchor) && !anchor.contains(&t.span))
    {
        return Err(unaligned());
    }
    let first = tokens
        .iter()
        .position(|t| anchor.contains(&t.span))
        .ok_or_else(unaligned)?;
    let last = tokens
        .iter()
        .rposition(|t| anchor.contains(&t.span))
        .expect("first exists");
    if tokens[first].span.start() != anchor.start() || tokens[last].span.end() != anchor.end() {
        return Err(unaligned());
    }
    Ok(first..last + 1)
}

pub fn build_argument_input(
    tokens: &[Subword],
    anchor: Span,
    role_id: u32,
    anchor_text: &str,
) -> Result<ArgumentInput> {
    let range = anchor_token_range(tokens, anchor)?;
    let marker = |s: &str| InputItem {
        text: s.to_string(),
        token: None,
    };
    let mut items = vec![
        marker(anchor_text),
        marker(SEPARATOR),
        marker(&role_id.to_string()),
        marker(END_OF_PREFIX),
    ];
    for (i, t) in tokens.iter().enumerate() {
        if i == range.start {
            items.push(marker(OPEN_MARK));
        }
        items.push(InputItem {
            text: t.text.clone(),
            token: Some(i),
        });
        if i + 1 == range.end {
            items.push(marker(CLOSE_MARK));
        }
    }
    Ok(ArgumentInput { items })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::LanguageClass;
    use crate::scorers::SubwordTokenizer;
    use crate::tokenize::RuleTokenizer;
    use proptest::prelude::*;

    fn toks(text: &str) -> Vec<Subword> {
        RuleTokenizer::new(None)
            .tokenize(text, LanguageClass::WhitespaceDelimited)
            .unwrap()
    }

    fn sp(a: usize, b: usize) -> Span {
        Span::new(a, b).unwrap()
    }

    #[test]
    fn anchor_at_sentence_start() {
        let t = toks("Protests erupted");
        let input = build_argument_input(&t, sp(0, 8), 2, "Protests").unwrap();
        assert_eq!(input.render(), "Protests ; 2 </s> < Protests > erupted");
    }

    #[test]
    fn multiword_anchor_is_bracketed_whole() {
        let text = "Fighting broke out overnight";
        let t = toks(text);
        let input = build_argument_input(&t, sp(9, 18), 1, "broke out").unwrap();
        assert_eq!(
            input.render(),
            "broke out ; 1 </s> Fighting < broke out > overnight"
        );
        assert_eq!(input.token_rows(), vec![4, 6, 7, 9]);
    }

    #[test]
    fn partial_token_anchor_rejected() {
        let t = toks("Floods displaced thousands");
        assert!(build_argument_input(&t, sp(8, 12), 1, "spla").is_err());
        assert!(build_argument_input(&t, sp(7, 16), 1, "displaced").is_ok());
        assert!(build_argument_input(&t, sp(7, 18), 1, "x").is_err());
    }

    proptest! {
        #[test]
        fn stripping_markers_recovers_tokens(
            words in prop::collection::vec("[a-z<>;]{1,6}", 1..8),
            a in 0usize..8, len in 1usize..4,
        ) {
            let text = words.join(" ");
            let t = toks(&text);
            prop_assume!(a < t.len());
            let b = (a + len).min(t.len());
            let anchor = t[a].span.cover(&t[b - 1].span);
            let input = build_argument_input(&t, anchor, 3, anchor.slice(&text)).unwrap();
            let original: Vec<&str> = t.iter().map(|s| s.text.as_str()).collect();
            prop_assert_eq!(input.sentence_tokens(), original);
            prop_assert_eq!(input.items.len(), t.len() + 6);
        }
    }
}
