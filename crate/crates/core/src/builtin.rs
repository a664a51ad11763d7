//! Data shipped with the crate: a small ontology, reference rules and
//! lookup tables. Used when a configuration leaves a path unset.

use crate::error::Result;
use crate::index::Gazetteer;
use crate::ontology::Ontology;
use crate::pipeline::Pipeline;
use crate::query::Stopwords;
use crate::scorers::{RuleScorers, RuleSet};
use crate::summarize::CategoryTable;
use crate::tokenize::LabelStats;

pub const ONTOLOGY: &str = include_str!("../data/ontology.toml");
pub const RULES: &str = include_str!("../data/rules.tsv");
pub const GAZETTEER: &str = include_str!("../data/gazetteer.tsv");
pub const CATEGORIES: &str = include_str!("../data/categories.tsv");
pub const STOPWORDS: &str = include_str!("../data/stopwords.txt");
pub const LABEL_STATS: &str = include_str!("../data/label_stats.tsv");
pub const LEXICON: &str = include_str!("../data/lexicon.txt");
pub const DICTIONARY: &str = include_str!("../data/dictionary.tsv");

pub fn ontology() -> Result<Ontology> {
    Ontology::from_toml_str(ONTOLOGY)
}

pub fn rule_scorers(ontology: &Ontology) -> Result<RuleScorers> {
    let rules = RuleSet::parse(RULES, "<builtin rules>")?;
    rules.validate(ontology)?;
    Ok(RuleScorers::new(rules, ontology.event_types().iter().map(String::as_str)))
}

pub fn lexicon() -> impl Iterator<Item = &'static str> {
    LEXICON.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'))
}

pub fn gazetteer() -> Result<Gazetteer> {
    Gazetteer::parse(GAZETTEER, "<builtin gazetteer>")
}

pub fn categories() -> Result<CategoryTable> {
    CategoryTable::parse(CATEGORIES, "<builtin categories>")
}

pub fn stopwords() -> Stopwords {
    Stopwords::parse(STOPWORDS)
}

pub fn label_stats() -> Result<LabelStats> {
    LabelStats::parse(LABEL_STATS, "<builtin label stats>")
}

/// The pipeline of a default [`Config`](crate::service::Config).
pub fn pipeline() -> Result<Pipeline> {
    Ok(crate::service::Config::default().build()?.pipeline)
}
