//! Same-sentence event coreference and event-event relations decoded from
//! pairwise anchor scores, plus merging of coreferent events and the graph
//! handed to renderers.
//!
//! The decoder maximizes the summed score of the chosen pairwise labels
//! subject to coreference being an equivalence relation whose classes share
//! an event type:
//!
//! * every ordered pair inside one class contributes its coreference score;
//! * every pair of classes `X`, `Y` contributes the best of three options:
//!   no relation (`none` both ways), an edge `X -> Y` (`related` from `X`
//!   to `Y`, `none` back) or an edge `Y -> X`.
//!
//! Up to [`EXACT_LIMIT`] anchors the optimum is found by enumerating every
//! type-consistent partition. Larger sentences fall back to greedy
//! union-find over the highest-margin coreference pairs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::document::Sentence;
use crate::error::{Error, Result};
use crate::event::{Argument, EventGraph, EventMention, GraphArgument, GraphEdge, GraphNode};
use crate::ontology::{AGENT, PATIENT, RELATED_EVENT};
use crate::span::Span;

/// Largest anchor count decoded exactly.
pub const EXACT_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnchorRef {
    pub span: Span,
    pub event_type: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairLabel {
    None,
    RelatedEvent,
    Coreference,
}

impl PairLabel {
    pub const ALL: [PairLabel; 3] = [PairLabel::None, PairLabel::RelatedEvent, PairLabel::Coreference];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            PairLabel::None => "none",
            PairLabel::RelatedEvent => RELATED_EVENT,
            PairLabel::Coreference => "coreference",
        }
    }

    pub fn parse(s: &str) -> Option<PairLabel> {
        PairLabel::ALL.into_iter().find(|l| l.name() == s)
    }
}

/// Scores over `[none, related-event, coreference]` for every ordered pair
/// of anchors. Diagonal entries are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<[f64; 3]>>", into = "Vec<Vec<[f64; 3]>>")]
pub struct PairScores {
    n: usize,
    values: Vec<[f64; 3]>,
}

impl PairScores {
    /// All pairs favour `none` by `margin`.
    pub fn uniform_none(n: usize, margin: f64) -> Self {
        PairScores {
            n,
            values: vec![[margin, -margin, -margin]; n * n],
        }
    }

    pub fn from_rows(rows: Vec<Vec<[f64; 3]>>) -> Result<Self> {
        let n = rows.len();
        let mut values = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::ShapeMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            if row.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::InvalidEvent("non-finite pair score".into()));
            }
            values.extend(row);
        }
        Ok(PairScores { n, values })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, from: usize, to: usize) -> [f64; 3] {
        self.values[from * self.n + to]
    }

    pub fn score(&self, from: usize, to: usize, label: PairLabel) -> f64 {
        self.get(from, to)[label.index()]
    }

    pub fn set(&mut self, from: usize, to: usize, scores: [f64; 3]) {
        self.values[from * self.n + to] = scores;
    }
}

impl TryFrom<Vec<Vec<[f64; 3]>>> for PairScores {
    type Error = Error;
    fn try_from(rows: Vec<Vec<[f64; 3]>>) -> Result<Self> {
        PairScores::from_rows(rows)
    }
}

impl From<PairScores> for Vec<Vec<[f64; 3]>> {
    fn from(p: PairScores) -> Self {
        p.values.chunks(p.n.max(1)).take(p.n).map(<[_]>::to_vec).collect()
    }
}

/// Coreference classes (anchor indices, each sorted; classes ordered by
/// their first anchor) and directed related-event edges between classes.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RelationDecode {
    pub classes: Vec<Vec<usize>>,
    pub edges: Vec<(usize, usize)>,
}

impl RelationDecode {
    /// Class index of every anchor.
    pub fn class_of(&self) -> Vec<usize> {
        let n = self.classes.iter().map(Vec::len).sum();
        let mut out = vec![0; n];
        for (c, members) in self.classes.iter().enumerate() {
            for &a in members {
                out[a] = c;
            }
        }
        out
    }
}

pub fn decode_relations(anchors: &[AnchorRef], scores: &PairScores) -> Result<RelationDecode> {
    if scores.len() != anchors.len() {
        return Err(Error::ShapeMismatch {
            expected: anchors.len(),
            got: scores.len(),
        });
    }
    let labels = if anchors.len() <= EXACT_LIMIT {
        exact_partition(anchors, scores)
    } else {
        greedy_partition(anchors, scores)
    };
    Ok(finish(&labels, scores))
}

/// Restricted-growth labels `labels[i] <= max(labels[..i]) + 1` enumerate
/// every partition exactly once.
fn exact_partition(anchors: &[AnchorRef], scores: &PairScores) -> Vec<usize> {
    let n = anchors.len();
    if n == 0 {
        return Vec::new();
    }
    let mut labels = vec![0usize; n];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        if type_consistent(anchors, &labels) {
            let v = objective(&labels, scores);
            if best.as_ref().is_none_or(|(b, _)| v > *b) {
                best = Some((v, labels.clone()));
            }
        }
        // Advance to the next restricted-growth string.
        let mut i = n - 1;
        loop {
            if i == 0 {
                return best.expect("singletons are always consistent").1;
            }
            let ceiling = labels[..i].iter().max().copied().unwrap_or(0) + 1;
            if labels[i] < ceiling {
                labels[i] += 1;
                for l in &mut labels[i + 1..] {
                    *l = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

fn type_consistent(anchors: &[AnchorRef], labels: &[usize]) -> bool {
    let mut types: BTreeMap<usize, &str> = BTreeMap::new();
    anchors.iter().zip(labels).all(|(a, &l)| {
        *types.entry(l).or_insert(&a.event_type) == a.event_type
    })
}

/// Value of the best edge choice between two disjoint classes, and the
/// choice: `None`, `Some(true)` for `x -> y`, `Some(false)` for `y -> x`.
/// Ties prefer no edge, then `x -> y`.
fn edge_choice(x: &[usize], y: &[usize], scores: &PairScores) -> (f64, Option<bool>) {
    let (mut none, mut fwd, mut back) = (0.0, 0.0, 0.0);
    for &a in x {
        for &b in y {
            let ab = scores.get(a, b);
            let ba = scores.get(b, a);
            none += ab[0] + ba[0];
            fwd += ab[1] + ba[0];
            back += ab[0] + ba[1];
        }
    }
    let mut best = (none, None);
    if fwd > best.0 {
        best = (fwd, Some(true));
    }
    if back > best.0 {
        best = (back, Some(false));
    }
    best
}

fn group(labels: &[usize]) -> Vec<Vec<usize>> {
    let mut by_label: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_label.entry(l).or_default().push(i);
    }
    let mut classes: Vec<Vec<usize>> = by_label.into_values().collect();
    classes.sort_by_key(|c| c[0]);
    classes
}

fn objective(labels: &[usize], scores: &PairScores) -> f64 {
    let classes = group(labels);
    let mut total = 0.0;
    for c in &classes {
        for &a in c {
            for &b in c {
                if a != b {
                    total += scores.score(a, b, PairLabel::Coreference);
                }
            }
        }
    }
    for (i, x) in classes.iter().enumerate() {
        for y in &classes[i + 1..] {
            total += edge_choice(x, y, scores).0;
        }
    }
    total
}

fn finish(labels: &[usize], scores: &PairScores) -> RelationDecode {
    let classes = group(labels);
    let mut edges = Vec::new();
    for (i, x) in classes.iter().enumerate() {
        for (j, y) in classes.iter().enumerate().skip(i + 1) {
            match edge_choice(x, y, scores).1 {
                Some(true) => edges.push((i, j)),
                Some(false) => edges.push((j, i)),
                None => {}
            }
        }
    }
    RelationDecode { classes, edges }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}

/// Pairs whose symmetrized coreference score beats both other labels are
/// merged in order of decreasing margin; a merge joining two event types is
/// skipped.
fn greedy_partition(anchors: &[AnchorRef], scores: &PairScores) -> Vec<usize> {
    let n = anchors.len();
    let sym = |a: usize, b: usize, l: PairLabel| (scores.score(a, b, l) + scores.score(b, a, l)) / 2.0;
    let mut candidates = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let coref = sym(a, b, PairLabel::Coreference);
            let other = sym(a, b, PairLabel::None).max(sym(a, b, PairLabel::RelatedEvent));
            if coref > other {
                candidates.push((coref - other, a, b));
            }
        }
    }
    candidates.sort_by(|x, y| y.0.total_cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    let mut uf = UnionFind::new(n);
    for (_, a, b) in candidates {
        let (ra, rb) = (uf.find(a), uf.find(b));
        if ra != rb && anchors[ra].event_type == anchors[rb].event_type {
            uf.union(ra, rb);
        }
    }
    (0..n).map(|i| uf.find(i)).collect()
}

/// Collapse each coreference class into a single event. `classes` must
/// partition `0..events.len()`.
pub fn merge_coreferent(events: &[EventMention], classes: &[Vec<usize>]) -> Result<Vec<EventMention>> {
    let mut seen = vec![false; events.len()];
    for &i in classes.iter().flatten() {
        if i >= events.len() || std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidEvent(format!(
                "coreference classes do not partition {} events",
                events.len()
            )));
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::InvalidEvent("event missing from coreference classes".into()));
    }

    let mut out = Vec::with_capacity(classes.len());
    for class in classes {
        let Some(&first) = class.first() else {
            return Err(Error::InvalidEvent("empty coreference class".into()));
        };
        let head = &events[first];
        if class.len() == 1 {
            out.push(head.clone());
            continue;
        }
        let mut anchors = Vec::new();
        let mut arguments: Vec<Argument> = Vec::new();
        let mut confidence: f64 = 0.0;
        let (mut when, mut where_) = (None, None);
        for &i in class {
            let e = &events[i];
            if e.event_type() != head.event_type() {
                return Err(Error::InvalidEvent(format!(
                    "coreference class mixes `{}` and `{}`",
                    head.event_type(),
                    e.event_type()
                )));
            }
            anchors.extend_from_slice(e.anchors());
            confidence = confidence.max(e.anchor_confidence());
            for a in e.arguments() {
                match arguments.iter_mut().find(|b| b.role == a.role && b.span == a.span) {
                    Some(b) => b.confidence = b.confidence.max(a.confidence),
                    None => arguments.push(a.clone()),
                }
            }
            when = when.or(e.when());
            where_ = where_.or(e.where_());
        }
        out.push(
            EventMention::new(head.event_type(), anchors, confidence, head.sentence_index())?
                .with_arguments(arguments)?
                .with_when(when)?
                .with_where(where_)?,
        );
    }
    Ok(out)
}

/// Build the display graph for a document. `edges` index into `events`;
/// `sentences` supplies the text for labels and argument strings.
pub fn build_event_graph(
    sentences: &[Sentence],
    events: &[EventMention],
    edges: &[(usize, usize)],
) -> Result<EventGraph> {
    let mut ids = Vec::with_capacity(events.len());
    let mut per_sentence: BTreeMap<usize, usize> = BTreeMap::new();
    let mut nodes = Vec::with_capacity(events.len());
    for e in events {
        let s = e.sentence_index();
        let sentence = sentences
            .iter()
            .find(|x| x.index == s)
            .ok_or_else(|| Error::Graph(format!("event refers to missing sentence {s}")))?;
        let k = per_sentence.entry(s).or_insert(0);
        let id = crate::event::node_id(s, *k);
        *k += 1;
        let anchor_text: Vec<&str> = e.anchors().iter().map(|a| a.slice(&sentence.text)).collect();
        let arguments = e
            .arguments()
            .iter()
            .filter(|a| a.role == AGENT || a.role == PATIENT)
            .chain(e.arguments().iter().filter(|a| a.role != AGENT && a.role != PATIENT))
            .map(|a| GraphArgument {
                role: a.role.clone(),
                text: a.span.slice(&sentence.text).to_string(),
                span: a.span,
            })
            .collect();
        nodes.push(GraphNode {
            id: id.clone(),
            sentence_index: s,
            event_type: e.event_type().to_string(),
            label: format!("{}: {}", e.event_type(), anchor_text.join(" / ")),
            arguments,
        });
        ids.push(id);
    }
    let mut graph_edges = Vec::with_capacity(edges.len());
    for &(from, to) in edges {
        if from >= ids.len() || to >= ids.len() {
            return Err(Error::Graph(format!("edge ({from}, {to}) has a dangling endpoint")));
        }
        if from == to {
            return Err(Error::Graph(format!("self-edge on {}", ids[from])));
        }
        graph_edges.push(GraphEdge {
            from: ids[from].clone(),
            to: ids[to].clone(),
            label: RELATED_EVENT.to_string(),
        });
    }
    Ok(EventGraph {
        nodes,
        edges: graph_edges,
    })
}
