use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TagKind {
    Outside,
    Begin,
    Inside,
}

/// One BIO tag. `label` is the event type (or role) for typed tags and
/// `None` for the bare `B`/`I` of a single-role tagset.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tag {
    pub kind: TagKind,
    pub label: Option<String>,
}

impl Tag {
    pub fn parse(s: &str) -> Result<Tag> {
        let (kind, rest) = match s.split_at_checked(1) {
            Some(("O", "")) => return Ok(Tag { kind: TagKind::Outside, label: None }),
            Some(("B", rest)) => (TagKind::Begin, rest),
            Some(("I", rest)) => (TagKind::Inside, rest),
            _ => return Err(Error::UnknownLabel(s.to_string())),
        };
        let label = match rest {
            "" => None,
            r => match r.strip_prefix('-') {
                Some(l) if !l.is_empty() => Some(l.to_string()),
                _ => return Err(Error::UnknownLabel(s.to_string())),
            },
        };
        Ok(Tag { kind, label })
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            TagKind::Outside => "O",
            TagKind::Begin => "B",
            TagKind::Inside => "I",
        };
        match &self.label {
            Some(l) => write!(f, "{k}-{l}"),
            None => f.write_str(k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tagset {
    tags: Vec<Tag>,
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Tagset {
    pub fn from_names<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut tags = Vec::new();
        let mut out_names = Vec::new();
        let mut index = HashMap::new();
        for n in names {
            let n = n.as_ref();
            let tag = Tag::parse(n)?;
            if index.insert(n.to_string(), tags.len()).is_some() {
                return Err(Error::UnknownLabel(format!("duplicate tag {n}")));
            }
            tags.push(tag);
            out_names.push(n.to_string());
        }
        if !index.contains_key("O") {
            return Err(Error::UnknownLabel("tagset lacks O".into()));
        }
        Ok(Tagset {
            tags,
            names: out_names,
            index,
        })
    }

    /// `O` followed by `B-t`, `I-t` for every type in the given order.
    pub fn for_event_types<'a>(types: impl IntoIterator<Item = &'a str>) -> Self {
        let mut names = vec!["O".to_string()];
        for t in types {
            names.push(format!("B-{t}"));
            names.push(format!("I-{t}"));
        }
        Tagset::from_names(names).expect("well-formed event tagset")
    }

    /// `O`, `B`, `I` for tagging the fillers of a single role.
    pub fn for_role() -> Self {
        Tagset::from_names(["O", "B", "I"]).expect("well-formed role tagset")
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn tag(&self, i: usize) -> &Tag {
        &self.tags[i]
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn outside(&self) -> usize {
        self.index["O"]
    }
}

/// Per-token scores over a tagset, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelScoreMatrix {
    tagset: Arc<Tagset>,
    rows: usize,
    values: Vec<f64>,
}

/// Wire form of [`LabelScoreMatrix`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelScoreMatrixWire {
    pub tags: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl LabelScoreMatrix {
    pub fn new(tagset: Arc<Tagset>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let width = tagset.len();
        let n = rows.len();
        let mut values = Vec::with_capacity(n * width);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != width {
                return Err(Error::ShapeMismatch {
                    expected: width,
                    got: r.len(),
                });
            }
            if let Some(v) = r.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidEvent(format!("non-finite score {v} in row {i}")));
            }
            values.extend(r);
        }
        Ok(LabelScoreMatrix {
            tagset,
            rows: n,
            values,
        })
    }

    /// All rows score `hot` on `O` and `cold` elsewhere.
    pub fn filled(tagset: Arc<Tagset>, rows: usize, hot: f64, cold: f64) -> Self {
        let o = tagset.outside();
        let width = tagset.len();
        let mut values = vec![cold; rows * width];
        for r in 0..rows {
            values[r * width + o] = hot;
        }
        LabelScoreMatrix {
            tagset,
            rows,
            values,
        }
    }

    pub fn set(&mut self, row: usize, tag: usize, v: f64) {
        let w = self.tagset.len();
        self.values[row * w + tag] = v;
    }

    pub fn tagset(&self) -> &Arc<Tagset> {
        &self.tagset
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.tagset.len();
        &self.values[i * w..(i + 1) * w]
    }

    /// Index of the highest score in row `i`; ties go to the lowest index.
    pub fn argmax(&self, i: usize) -> usize {
        argmax(self.row(i))
    }

    /// Softmax probability of `tag` in row `i`.
    pub fn probability(&self, i: usize, tag: usize) -> f64 {
        let row = self.row(i);
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = row.iter().map(|v| (v - m).exp()).sum();
        (row[tag] - m).exp() / z
    }

    /// Keep only the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> LabelScoreMatrix {
        let mut values = Vec::with_capacity(rows.len() * self.tagset.len());
        for &r in rows {
            values.extend_from_slice(self.row(r));
        }
        LabelScoreMatrix {
            tagset: self.tagset.clone(),
            rows: rows.len(),
            values,
        }
    }

    pub fn to_wire(&self) -> LabelScoreMatrixWire {
        LabelScoreMatrixWire {
            tags: self.tagset.names().to_vec(),
            rows: (0..self.rows).map(|i| self.row(i).to_vec()).collect(),
        }
    }

    pub fn from_wire(w: LabelScoreMatrixWire) -> Result<Self> {
        let tagset = Arc::new(Tagset::from_names(&w.tags)?);
        LabelScoreMatrix::new(tagset, w.rows)
    }
}

pub(crate) fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in xs.iter().enumerate().skip(1) {
        if *v > xs[best] {
            best = i;
        }
    }
    best
}
