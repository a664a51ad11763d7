//! Micro-averaged precision, recall and F1 for anchors, arguments and
//! same-sentence coreference, with exact-offset matching.
//!
//! A ratio with a zero denominator is 1 when prediction and gold are both
//! empty and 0 otherwise.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::ExtractionResult;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn from_counts(tp: usize, predicted: usize, gold: usize) -> Self {
        let both_empty = predicted == 0 && gold == 0;
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                if both_empty { 1.0 } else { 0.0 }
            } else {
                num as f64 / den as f64
            }
        };
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, gold);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf { precision, recall, f1 }
    }
}

/// Multiset matching of identical keys.
pub fn score_keys<K: Ord>(pred: impl IntoIterator<Item = K>, gold: impl IntoIterator<Item = K>) -> Prf {
    let mut counts: BTreeMap<K, (usize, usize)> = BTreeMap::new();
    let (mut np, mut ng) = (0, 0);
    for k in pred {
        counts.entry(k).or_default().0 += 1;
        np += 1;
    }
    for k in gold {
        counts.entry(k).or_default().1 += 1;
        ng += 1;
    }
    let tp = counts.values().map(|(p, g)| p.min(g)).sum();
    Prf::from_counts(tp, np, ng)
}

/// Pairwise link scoring: an unordered pair is positive iff both members
/// share a class. Every predicted item must occur in the gold classes.
pub fn score_coref_classes<K: Ord + Clone + std::fmt::Debug>(pred: &[Vec<K>], gold: &[Vec<K>]) -> Result<Prf> {
    let universe: BTreeSet<&K> = gold.iter().flatten().collect();
    if let Some(k) = pred.iter().flatten().find(|k| !universe.contains(k)) {
        return Err(Error::DocumentMismatch(format!("predicted anchor {k:?} not in gold")));
    }
    let pairs = |classes: &[Vec<K>]| -> BTreeSet<(K, K)> {
        let mut out = BTreeSet::new();
        for c in classes {
            for (i, a) in c.iter().enumerate() {
                for b in &c[i + 1..] {
                    let (x, y) = if a <= b { (a, b) } else { (b, a) };
                    out.insert((x.clone(), y.clone()));
                }
            }
        }
        out
    };
    let (p, g) = (pairs(pred), pairs(gold));
    Ok(Prf::from_counts(p.intersection(&g).count(), p.len(), g.len()))
}

fn paired<'a>(
    pred: &'a [ExtractionResult],
    gold: &'a [ExtractionResult],
) -> Result<Vec<(&'a ExtractionResult, &'a ExtractionResult)>> {
    let index = |rs: &'a [ExtractionResult]| -> Result<BTreeMap<&'a str, &'a ExtractionResult>> {
        let mut m = BTreeMap::new();
        for r in rs {
            if m.insert(r.document.id.as_str(), r).is_some() {
                return Err(Error::DocumentMismatch(format!("duplicate document `{}`", r.document.id)));
            }
        }
        Ok(m)
    };
    let (p, g) = (index(pred)?, index(gold)?);
    if let Some(id) = p.keys().find(|k| !g.contains_key(*k)).or(g.keys().find(|k| !p.contains_key(*k))) {
        return Err(Error::DocumentMismatch(format!("document `{id}` not in both sets")));
    }
    Ok(p.into_iter().map(|(id, r)| (r, g[id])).collect())
}

type AbsSpan = (usize, usize);

/// Anchors of every event as (document offsets, type), one entry per
/// anchor span.
fn anchor_keys(r: &ExtractionResult) -> Vec<(String, AbsSpan, String)> {
    let mut out = Vec::new();
    for s in &r.sentences {
        for e in &s.events {
            for a in &e.anchors {
                out.push((
                    r.document.id.clone(),
                    (s.char_base + a.start, s.char_base + a.end),
                    e.event_type.clone(),
                ));
            }
        }
    }
    out
}

pub fn score_anchors(pred: &[ExtractionResult], gold: &[ExtractionResult]) -> Result<Prf> {
    let docs = paired(pred, gold)?;
    Ok(score_keys(
        docs.iter().flat_map(|(p, _)| anchor_keys(p)),
        docs.iter().flat_map(|(_, g)| anchor_keys(g)),
    ))
}

type ArgumentKey = (String, AbsSpan, String, String, Vec<AbsSpan>);

fn argument_keys(r: &ExtractionResult, with_anchors: bool) -> Vec<ArgumentKey> {
    let mut out = Vec::new();
    for s in &r.sentences {
        for e in &s.events {
            let anchors: Vec<AbsSpan> = if with_anchors {
                let mut a: Vec<AbsSpan> = e
                    .anchors
                    .iter()
                    .map(|a| (s.char_base + a.start, s.char_base + a.end))
                    .collect();
                a.sort();
                a
            } else {
                Vec::new()
            };
            for a in &e.arguments {
                out.push((
                    r.document.id.clone(),
                    (s.char_base + a.start, s.char_base + a.end),
                    e.event_type.clone(),
                    a.role.clone(),
                    anchors.clone(),
                ));
            }
        }
    }
    out
}

/// Arguments match on offsets, event type and role; with
/// `require_anchor_match` the owning event's anchor offsets must match too.
pub fn score_arguments(pred: &[ExtractionResult], gold: &[ExtractionResult], require_anchor_match: bool) -> Result<Prf> {
    let docs = paired(pred, gold)?;
    Ok(score_keys(
        docs.iter().flat_map(|(p, _)| argument_keys(p, require_anchor_match)),
        docs.iter().flat_map(|(_, g)| argument_keys(g, require_anchor_match)),
    ))
}

fn coref_classes(r: &ExtractionResult) -> Vec<Vec<(String, AbsSpan)>> {
    r.sentences
        .iter()
        .flat_map(|s| {
            s.events.iter().map(move |e| {
                e.anchors
                    .iter()
                    .map(|a| (r.document.id.clone(), (s.char_base + a.start, s.char_base + a.end)))
                    .collect()
            })
        })
        .collect()
}

pub fn score_coref(pred: &[ExtractionResult], gold: &[ExtractionResult]) -> Result<Prf> {
    let docs = paired(pred, gold)?;
    let p: Vec<_> = docs.iter().flat_map(|(p, _)| coref_classes(p)).collect();
    let g: Vec<_> = docs.iter().flat_map(|(_, g)| coref_classes(g)).collect();
    score_coref_classes(&p, &g)
}
