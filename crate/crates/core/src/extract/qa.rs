//! Span answers from start/end scores with a null (no-answer) option.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuestionKind {
    When,
    Where,
}

impl QuestionKind {
    pub fn word(self) -> &'static str {
        match self {
            QuestionKind::When => "When",
            QuestionKind::Where => "Where",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaQuestion {
    pub kind: QuestionKind,
    pub anchor_text: String,
    /// Fully rendered model input.
    pub text: String,
}

impl QaQuestion {
    pub fn new(kind: QuestionKind, anchor_text: &str, context: &str) -> Self {
        QaQuestion {
            kind,
            anchor_text: anchor_text.to_string(),
            text: format!(
                "<s> {} did the {anchor_text} happen? </s> {context} </s>",
                kind.word()
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QASpanScores {
    pub start_scores: Vec<f64>,
    pub end_scores: Vec<f64>,
    pub null_score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Answer {
    pub start: usize,
    /// Inclusive token index.
    pub end: usize,
    pub score: f64,
    /// Logistic of the margin of the answer over the null score.
    pub confidence: f64,
}

impl QASpanScores {
    pub fn check(&self, tokens: usize) -> Result<()> {
        for len in [self.start_scores.len(), self.end_scores.len()] {
            if len != tokens {
                return Err(Error::ShapeMismatch {
                    expected: tokens,
                    got: len,
                });
            }
        }
        Ok(())
    }

    /// Highest `start + end` over pairs with `start <= end`, or `None` when
    /// the null score exceeds it. Ties keep the earliest end, then the
    /// earliest start.
    pub fn best_answer(&self) -> Option<Answer> {
        let n = self.start_scores.len().min(self.end_scores.len());
        let mut best: Option<(usize, usize, f64)> = None;
        let mut best_start = 0;
        for j in 0..n {
            if self.start_scores[j] > self.start_scores[best_start] {
                best_start = j;
            }
            let v = self.start_scores[best_start] + self.end_scores[j];
            if best.is_none_or(|(_, _, b)| v > b) {
                best = Some((best_start, j, v));
            }
        }
        let (start, end, score) = best?;
        if self.null_score > score {
            return None;
        }
        Some(Answer {
            start,
            end,
            score,
            confidence: 1.0 / (1.0 + (self.null_score - score).exp()),
        })
    }
}
