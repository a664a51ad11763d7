//! Searchable event records, location containment and ranking.
//!
//! Each populated query condition contributes
//! `beta * ec * cac(q, field) + (1 - beta) * cac(q, sentence)`; the context
//! condition contributes `cac(q, sentence)` alone, and the event type is a
//! filter. A condition's traffic light is black when no candidate field
//! text matched at all, otherwise green, yellow or red by score.

mod gazetteer;
mod store;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use gazetteer::Gazetteer;
pub use store::{EventIndex, IndexSnapshot, DocRecord, INDEX_FORMAT, INDEX_VERSION};

use crate::error::{Error, Result};
use crate::event::EventMention;
use crate::ontology::{AGENT, PATIENT};
use crate::scorers::CacProvider;

pub const DEFAULT_BETA: f64 = 0.75;
pub const DEFAULT_GREEN: f64 = 0.5;
pub const DEFAULT_YELLOW: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldValue {
    pub text: String,
    /// Extraction confidence.
    pub ec: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationField {
    pub text: String,
    pub ec: f64,
    pub expanded_countries: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedEvent {
    /// `{doc_id}/s{sentence}.e{event}`.
    pub event_id: String,
    pub doc_id: String,
    pub sentence_index: usize,
    pub sentence_text: String,
    pub sentence_translation: Option<String>,
    pub event_type: String,
    pub anchor_text: String,
    pub agent: Option<FieldValue>,
    pub patient: Option<FieldValue>,
    pub location: Option<LocationField>,
    pub when_text: Option<String>,
}

/// The highest-confidence argument with `role`, earliest on ties.
fn best_argument(event: &EventMention, role: &str, text: &str) -> Option<FieldValue> {
    let mut best: Option<&crate::event::Argument> = None;
    for a in event.arguments_with_role(role) {
        if best.is_none_or(|b| a.confidence > b.confidence) {
            best = Some(a);
        }
    }
    best.map(|a| FieldValue {
        text: a.span.slice(text).to_string(),
        ec: a.confidence,
    })
}

/// Build the searchable record for one event of a document. `local_id` is
/// the event's id within its document (`s{i}.e{j}`).
pub fn index_event(
    event: &EventMention,
    doc_id: &str,
    local_id: &str,
    sentence_text: &str,
    translation: Option<&str>,
    gazetteer: &Gazetteer,
) -> IndexedEvent {
    let location = event.where_().map(|w| {
        let text = w.span.slice(sentence_text).to_string();
        LocationField {
            expanded_countries: gazetteer.containing(&text),
            text,
            ec: w.confidence,
        }
    });
    let anchors: Vec<&str> = event.anchors().iter().map(|a| a.slice(sentence_text)).collect();
    IndexedEvent {
        event_id: format!("{doc_id}/{local_id}"),
        doc_id: doc_id.to_string(),
        sentence_index: event.sentence_index(),
        sentence_text: sentence_text.to_string(),
        sentence_translation: translation.map(str::to_string),
        event_type: event.event_type().to_string(),
        anchor_text: anchors.join(" / "),
        agent: best_argument(event, AGENT, sentence_text),
        patient: best_argument(event, PATIENT, sentence_text),
        location,
        when_text: event.when().map(|w| w.span.slice(sentence_text).to_string()),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Query {
    /// Empty means every type.
    #[serde(default)]
    pub event_types: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patient: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
}

fn populated(s: &Option<String>) -> Option<&str> {
    s.as_deref().map(str::trim).filter(|s| !s.is_empty())
}

impl Query {
    pub fn validate(&self) -> Result<()> {
        if self.event_types.is_empty() && self.conditions().next().is_none() {
            return Err(Error::InvalidQuery("empty query".into()));
        }
        Ok(())
    }

    /// Populated text conditions in fixed order.
    pub fn conditions(&self) -> impl Iterator<Item = (Condition, &str)> {
        [
            (Condition::Agent, populated(&self.agent)),
            (Condition::Patient, populated(&self.patient)),
            (Condition::Location, populated(&self.location)),
            (Condition::Context, populated(&self.context)),
        ]
        .into_iter()
        .filter_map(|(c, t)| t.map(|t| (c, t)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Agent,
    Patient,
    Location,
    Context,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Light {
    Green,
    Yellow,
    Red,
    Black,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionScore {
    pub condition: Condition,
    pub score: f64,
    pub light: Light,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankParams {
    pub beta: f64,
    pub green: f64,
    pub yellow: f64,
}

impl Default for RankParams {
    fn default() -> Self {
        RankParams {
            beta: DEFAULT_BETA,
            green: DEFAULT_GREEN,
            yellow: DEFAULT_YELLOW,
        }
    }
}

impl RankParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::Config(format!("beta {} outside [0, 1]", self.beta)));
        }
        if !(self.yellow >= 0.0 && self.yellow <= self.green) {
            return Err(Error::Config("need 0 <= yellow <= green".into()));
        }
        Ok(())
    }
}

/// `beta * ec * cac(q, field) + (1 - beta) * cac(q, sentence)`; an absent
/// field contributes nothing to the first term.
pub fn score_condition(
    q_text: &str,
    field: Option<(&str, f64)>,
    sentence_text: &str,
    cac: &dyn CacProvider,
    beta: f64,
) -> Result<f64> {
    let candidates: Vec<&str> = field.iter().map(|f| f.0).collect();
    let ec = field.map_or(0.0, |f| f.1);
    Ok(score_candidates(q_text, &candidates, ec, sentence_text, cac, beta)?.0)
}

/// As [`score_condition`], taking the best of several candidate texts for
/// the field. Also reports whether any candidate matched at all.
fn score_candidates(
    q_text: &str,
    candidates: &[&str],
    ec: f64,
    sentence_text: &str,
    cac: &dyn CacProvider,
    beta: f64,
) -> Result<(f64, bool)> {
    if q_text.trim().is_empty() {
        return Err(Error::InvalidQuery("empty condition text".into()));
    }
    let mut field_cac: f64 = 0.0;
    for c in candidates {
        field_cac = field_cac.max(cac.cac(q_text, c)?);
    }
    let sentence = cac.cac(q_text, sentence_text)?;
    Ok((beta * ec * field_cac + (1.0 - beta) * sentence, field_cac > 0.0))
}

/// Black without field evidence, otherwise by threshold.
pub fn traffic_light(score: f64, field_present: bool, params: &RankParams) -> Light {
    if !field_present {
        Light::Black
    } else if score >= params.green {
        Light::Green
    } else if score >= params.yellow {
        Light::Yellow
    } else {
        Light::Red
    }
}

/// `None` when the event type is filtered out.
pub fn score_event(
    query: &Query,
    e: &IndexedEvent,
    cac: &dyn CacProvider,
    params: &RankParams,
) -> Result<Option<(f64, Vec<ConditionScore>)>> {
    if !query.event_types.is_empty() && !query.event_types.contains(&e.event_type) {
        return Ok(None);
    }
    let mut total = 0.0;
    let mut per = Vec::new();
    for (condition, q) in query.conditions() {
        let (score, evidence) = match condition {
            Condition::Agent | Condition::Patient => {
                let f = if condition == Condition::Agent { &e.agent } else { &e.patient };
                match f {
                    Some(f) => score_candidates(q, &[&f.text], f.ec, &e.sentence_text, cac, params.beta)?,
                    None => score_candidates(q, &[], 0.0, &e.sentence_text, cac, params.beta)?,
                }
            }
            Condition::Location => match &e.location {
                Some(l) => {
                    let mut cands = vec![l.text.as_str()];
                    cands.extend(l.expanded_countries.iter().map(String::as_str));
                    score_candidates(q, &cands, l.ec, &e.sentence_text, cac, params.beta)?
                }
                None => score_candidates(q, &[], 0.0, &e.sentence_text, cac, params.beta)?,
            },
            Condition::Context => {
                let s = cac.cac(q, &e.sentence_text)?;
                (s, s > 0.0)
            }
        };
        total += score;
        per.push(ConditionScore {
            condition,
            score,
            light: traffic_light(score, evidence, params),
        });
    }
    Ok(Some((total, per)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub event: IndexedEvent,
    pub total: f64,
    pub conditions: Vec<ConditionScore>,
}

/// Rank `events` for `query`: descending total, then `doc_id`, then
/// `event_id`; at most `k` hits. When the query has text conditions,
/// events scoring zero are not returned.
pub fn search<'a>(
    query: &Query,
    events: impl IntoIterator<Item = &'a IndexedEvent>,
    cac: &dyn CacProvider,
    params: &RankParams,
    k: usize,
) -> Result<Vec<SearchHit>> {
    query.validate()?;
    let scored = query.conditions().next().is_some();
    let mut hits = Vec::new();
    for e in events {
        if let Some((total, conditions)) = score_event(query, e, cac, params)? {
            if scored && total <= 0.0 {
                continue;
            }
            hits.push(SearchHit {
                event: e.clone(),
                total,
                conditions,
            });
        }
    }
    hits.sort_by(|a, b| {
        b.total
            .total_cmp(&a.total)
            .then_with(|| a.event.doc_id.cmp(&b.event.doc_id))
            .then_with(|| a.event.event_id.cmp(&b.event.event_id))
    });
    hits.truncate(k);
    Ok(hits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scorers::TableCac;
    use proptest::prelude::*;

    fn event(id: &str, doc: &str, t: &str, sentence: &str) -> IndexedEvent {
        IndexedEvent {
            event_id: format!("{doc}/{id}"),
            doc_id: doc.into(),
            sentence_index: 0,
            sentence_text: sentence.into(),
            sentence_translation: None,
            event_type: t.into(),
            anchor_text: String::new(),
            agent: None,
            patient: None,
            location: None,
            when_text: None,
        }
    }

    #[test]
    fn formula_examples() {
        let cac = TableCac::new().with("q", "field", 0.8).with("q", "sentence", 0.5);
        let v = score_condition("q", Some(("field", 0.9)), "sentence", &cac, 0.75).unwrap();
        assert!((v - 0.665).abs() < 1e-12);
        let cac = TableCac::new().with("q", "sentence", 0.4);
        assert!((score_condition("q", None, "sentence", &cac, 0.75).unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(score_condition("q", Some(("x", 1.0)), "y", &TableCac::new(), 0.75).unwrap(), 0.0);
    }

    #[test]
    fn lights() {
        let p = RankParams::default();
        assert_eq!(traffic_light(0.9, false, &p), Light::Black);
        assert_eq!(traffic_light(0.665, true, &p), Light::Green);
        assert_eq!(traffic_light(0.3, true, &p), Light::Yellow);
        assert_eq!(traffic_light(0.0, true, &p), Light::Red);
    }

    #[test]
    fn type_filter_and_context_only() {
        let cac = TableCac::new().with("anti-inflation", "prices rose", 0.6);
        let q = Query {
            event_types: ["Protest".to_string()].into(),
            ..Query::default()
        };
        assert!(score_event(&q, &event("a", "d", "Arrest", "x"), &cac, &RankParams::default())
            .unwrap()
            .is_none());
        let q = Query {
            context: Some("anti-inflation".into()),
            ..Query::default()
        };
        let (total, per) = score_event(&q, &event("a", "d", "Protest", "prices rose"), &cac, &RankParams::default())
            .unwrap()
            .unwrap();
        assert!((total - 0.6).abs() < 1e-12);
        assert_eq!(per.len(), 1);
    }

    #[test]
    fn totals_sum_conditions() {
        let cac = TableCac::new()
            .with("cholera", "vabā", 0.8)
            .with("cholera", "s", 0.2)
            .with("Iran", "s", 0.1);
        let mut e = event("a", "d", "Disease-Outbreak", "s");
        e.agent = Some(FieldValue { text: "vabā".into(), ec: 0.9 });
        e.location = Some(LocationField {
            text: "Tehran".into(),
            ec: 0.5,
            expanded_countries: ["Iran".to_string()].into(),
        });
        let q = Query {
            agent: Some("cholera".into()),
            location: Some("Iran".into()),
            ..Query::default()
        };
        let p = RankParams::default();
        let (total, per) = score_event(&q, &e, &cac, &p).unwrap().unwrap();
        let agent = 0.75 * 0.9 * 0.8 + 0.25 * 0.2;
        let location = 0.75 * 0.5 * 1.0 + 0.25 * 0.1;
        assert!((per[0].score - agent).abs() < 1e-12);
        assert!((per[1].score - location).abs() < 1e-12);
        assert!((total - agent - location).abs() < 1e-12);
    }

    #[test]
    fn ordering_and_truncation() {
        let cac = TableCac::new().with("x", "high", 0.9).with("x", "low", 0.4);
        let events = [
            event("e1", "b", "T", "low"),
            event("e1", "c", "T", "high"),
            event("e2", "a", "T", "low"),
        ];
        let q = Query {
            context: Some("x".into()),
            ..Query::default()
        };
        let hits = search(&q, &events, &cac, &RankParams::default(), 10).unwrap();
        let ids: Vec<&str> = hits.iter().map(|h| h.event.event_id.as_str()).collect();
        assert_eq!(ids, ["c/e1", "a/e2", "b/e1"]);
        assert_eq!(search(&q, &events, &cac, &RankParams::default(), 1).unwrap().len(), 1);
        assert!(search(&q, &[], &cac, &RankParams::default(), 5).unwrap().is_empty());
        assert!(search(&Query::default(), &events, &cac, &RankParams::default(), 5).is_err());
    }

    proptest! {
        #[test]
        fn monotone_in_every_input(
            ec in 0.0f64..=1.0, f in 0.0f64..=1.0, s in 0.0f64..=1.0,
            d in 0.0f64..0.5, which in 0usize..3, beta in 0.0f64..=1.0,
        ) {
            let base = |ec: f64, f: f64, s: f64| {
                let cac = TableCac::new().with("q", "field", f).with("q", "sentence", s);
                score_condition("q", Some(("field", ec)), "sentence", &cac, beta).unwrap()
            };
            let lo = base(ec, f, s);
            let hi = match which {
                0 => base((ec + d).min(1.0), f, s),
                1 => base(ec, (f + d).min(1.0), s),
                _ => base(ec, f, (s + d).min(1.0)),
            };
            prop_assert!(hi >= lo);
        }

        #[test]
        fn beta_extremes(ec in 0.0f64..=1.0, f in 0.0f64..=1.0, s in 0.0f64..=1.0) {
            let cac = TableCac::new().with("q", "field", f).with("q", "sentence", s);
            let one = score_condition("q", Some(("field", ec)), "sentence", &cac, 1.0).unwrap();
            let zero = score_condition("q", Some(("field", ec)), "sentence", &cac, 0.0).unwrap();
            prop_assert!((one - ec * f).abs() < 1e-12);
            prop_assert!((zero - s).abs() < 1e-12);
        }

        #[test]
        fn order_independent_of_insertion(perm in Just((0..6).collect::<Vec<usize>>()).prop_shuffle()) {
            let texts = ["high", "low", "high", "mid", "low", "high"];
            let cac = TableCac::new().with("x", "high", 0.9).with("x", "low", 0.4).with("x", "mid", 0.6);
            let events: Vec<IndexedEvent> = texts.iter().enumerate()
                .map(|(i, t)| event(&format!("e{i}"), &format!("d{}", i % 2), if i == 3 { "Other" } else { "T" }, t))
                .collect();
            let q = Query { context: Some("x".into()), event_types: ["T".to_string()].into(), ..Query::default() };
            let base = search(&q, &events, &cac, &RankParams::default(), 10).unwrap();
            let shuffled: Vec<IndexedEvent> = perm.iter().map(|&i| events[i].clone()).collect();
            prop_assert_eq!(&search(&q, &shuffled, &cac, &RankParams::default(), 10).unwrap(), &base);
            prop_assert!(base.iter().all(|h| h.event.event_type == "T"));
        }
    }
}
