//! Word alignment by cosine similarity and Itermax, and projection of spans
//! through an alignment.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::document::LanguageClass;
use crate::error::{Error, Result};
use crate::span::Span;
use crate::tokenize::{word_units, Subword};

pub const DEFAULT_ITERATIONS: usize = 2;
pub const DEFAULT_ALPHA: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let n = rows.len();
        let mut values = Vec::with_capacity(n * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::ShapeMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidEvent("non-finite similarity".into()));
            }
            values.extend(r);
        }
        Ok(SimilarityMatrix { rows: n, cols, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    fn map(&self, f: impl Fn(usize, usize, f64) -> f64) -> SimilarityMatrix {
        let mut values = self.values.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                values[i * self.cols + j] = f(i, j, self.get(i, j));
            }
        }
        SimilarityMatrix {
            rows: self.rows,
            cols: self.cols,
            values,
        }
    }
}

/// A set of (source index, target index) pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alignment {
    pub pairs: BTreeSet<(usize, usize)>,
}

impl Alignment {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.pairs.contains(&(i, j))
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `S[i][j] = cos(src[i], tgt[j])`.
pub fn similarity_matrix(src: &[Vec<f64>], tgt: &[Vec<f64>]) -> Result<SimilarityMatrix> {
    let dim = src.first().or(tgt.first()).map_or(0, Vec::len);
    let check = |side: &'static str, vs: &[Vec<f64>]| -> Result<Vec<f64>> {
        vs.iter()
            .enumerate()
            .map(|(index, v)| {
                if v.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: v.len(),
                    });
                }
                let n = norm(v);
                if n == 0.0 || !n.is_finite() {
                    return Err(Error::ZeroNorm {
                        side,
                        index,
                        token: String::new(),
                    });
                }
                Ok(n)
            })
            .collect()
    };
    let src_norms = check("source", src)?;
    let tgt_norms = check("target", tgt)?;
    let mut values = Vec::with_capacity(src.len() * tgt.len());
    for (a, na) in src.iter().zip(&src_norms) {
        for (b, nb) in tgt.iter().zip(&tgt_norms) {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            values.push((dot / (na * nb)).clamp(-1.0, 1.0));
        }
    }
    Ok(SimilarityMatrix {
        rows: src.len(),
        cols: tgt.len(),
        values,
    })
}

fn argmax(len: usize, at: impl Fn(usize) -> f64) -> usize {
    let mut best = 0;
    for k in 1..len {
        if at(k) > at(best) {
            best = k;
        }
    }
    best
}

/// Pairs that are the argmax of both their row and their column, ties going
/// to the lowest index.
pub fn argmax_intersection(s: &SimilarityMatrix) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    if s.rows == 0 || s.cols == 0 {
        return out;
    }
    let col_best: Vec<usize> = (0..s.cols).map(|j| argmax(s.rows, |i| s.get(i, j))).collect();
    for i in 0..s.rows {
        let j = argmax(s.cols, |j| s.get(i, j));
        if col_best[j] == i {
            out.insert((i, j));
        }
    }
    out
}

/// The cumulative alignment after each iteration that added something.
pub fn itermax_steps(s: &SimilarityMatrix, iterations: usize, alpha: f64) -> Vec<Alignment> {
    let mut steps = Vec::new();
    let mut current = Alignment::default();
    let mut row_aligned = vec![false; s.rows];
    let mut col_aligned = vec![false; s.cols];
    for _ in 0..iterations.max(1) {
        let discounted = s.map(|i, j, v| match (row_aligned[i], col_aligned[j]) {
            (true, true) => 0.0,
            (true, false) | (false, true) => alpha * v,
            (false, false) => v,
        });
        let added: Vec<(usize, usize)> = argmax_intersection(&discounted)
            .into_iter()
            .filter(|&(i, j)| !(row_aligned[i] && col_aligned[j]))
            .collect();
        if added.is_empty() {
            break;
        }
        for &(i, j) in &added {
            row_aligned[i] = true;
            col_aligned[j] = true;
            current.pairs.insert((i, j));
        }
        steps.push(current.clone());
    }
    steps
}

pub fn itermax(s: &SimilarityMatrix, iterations: usize, alpha: f64) -> Alignment {
    itermax_steps(s, iterations, alpha).pop().unwrap_or_default()
}

/// Target span from the first to the last target unit aligned to any
/// source unit overlapping `span`; `None` when none is aligned.
pub fn project_span(span: Span, src: &[Span], tgt: &[Span], alignment: &Alignment) -> Option<Span> {
    let mut lo: Option<usize> = None;
    let mut hi: Option<usize> = None;
    for &(i, j) in &alignment.pairs {
        if src.get(i).is_some_and(|s| s.overlaps(&span)) && j < tgt.len() {
            lo = Some(lo.map_or(j, |l| l.min(j)));
            hi = Some(hi.map_or(j, |h| h.max(j)));
        }
    }
    Some(tgt[lo?].cover(&tgt[hi?]))
}

/// A word (or, for scriptio-continua text, a subword) with its pooled
/// vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignUnit {
    pub text: String,
    pub span: Span,
    pub vector: Vec<f64>,
}

/// Mean of the subword vectors of each labeling unit (see [`word_units`]).
pub fn pool_words(tokens: &[Subword], vectors: &[Vec<f64>], class: LanguageClass) -> Result<Vec<AlignUnit>> {
    if tokens.len() != vectors.len() {
        return Err(Error::ShapeMismatch {
            expected: tokens.len(),
            got: vectors.len(),
        });
    }
    word_units(tokens, class)
        .into_iter()
        .map(|r| {
            let dim = vectors[r.start].len();
            let mut mean = vec![0.0; dim];
            for v in &vectors[r.clone()] {
                if v.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: v.len(),
                    });
                }
                for (m, x) in mean.iter_mut().zip(v) {
                    *m += x / r.len() as f64;
                }
            }
            Ok(AlignUnit {
                text: tokens[r.clone()].iter().map(|t| t.text.as_str()).collect(),
                span: tokens[r.start].span.cover(&tokens[r.end - 1].span),
                vector: mean,
            })
        })
        .collect()
}

/// Similarity between pooled units; zero-norm errors name the offending
/// word.
pub fn unit_similarity(src: &[AlignUnit], tgt: &[AlignUnit]) -> Result<SimilarityMatrix> {
    let sv: Vec<Vec<f64>> = src.iter().map(|u| u.vector.clone()).collect();
    let tv: Vec<Vec<f64>> = tgt.iter().map(|u| u.vector.clone()).collect();
    similarity_matrix(&sv, &tv).map_err(|e| match e {
        Error::ZeroNorm { side, index, .. } => {
            let units = if side == "source" { src } else { tgt };
            Error::ZeroNorm {
                side,
                index,
                token: units[index].text.clone(),
            }
        }
        other => other,
    })
}
