//! Service configuration, read from TOML. Every path is relative to the
//! directory of the config file; an unset path selects the built-in data.
//!
//! ```toml
//! [paths]
//! ontology = "ontology.toml"
//! gazetteer = "gazetteer.tsv"
//!
//! [providers]
//! scorers = "rules"          # rules | remote
//! tokenizer = "rule"         # rule | remote
//! embeddings = "gloss"       # gloss | hashed | table | remote
//! translation = "dictionary" # identity | dictionary | remote
//! cac = "lexical"            # embedding | lexical | table | remote
//!
//! [remote]
//! command = ["python3", "provider.py"]
//!
//! [ranking]
//! beta = 0.75
//!
//! [itermax]
//! iterations = 2
//! alpha = 0.9
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use crate::builtin;
use crate::error::{Error, Result};
use crate::index::{Gazetteer, RankParams};
use crate::ontology::Ontology;
use crate::pipeline::{AlignParams, Pipeline};
use crate::query::Stopwords;
use crate::scorers::remote::RemoteProvider;
use crate::scorers::{
    load_rule_scorer, DictionaryTranslator, EmbeddingCac, EmbeddingProvider, GlossEmbeddings, HashedEmbeddings,
    IdentityTranslator, LexicalCac, ProviderRegistry, RuleScorers, TableCac, TableEmbeddings,
};
use crate::summarize::CategoryTable;
use crate::tokenize::{LabelStats, RuleTokenizer};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub ontology: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub gazetteer: Option<PathBuf>,
    pub categories: Option<PathBuf>,
    pub label_stats: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub dictionary: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub cac_table: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScorerKind {
    #[default]
    Rules,
    Remote,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenizerKind {
    #[default]
    Rule,
    Remote,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingKind {
    Hashed,
    #[default]
    Gloss,
    Table,
    Remote,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TranslationKind {
    Identity,
    #[default]
    Dictionary,
    Remote,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CacKind {
    Embedding,
    #[default]
    Lexical,
    Table,
    Remote,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Providers {
    pub scorers: ScorerKind,
    pub tokenizer: TokenizerKind,
    /// Rule tokenizer piece length; 0 keeps whole words.
    pub chunk: usize,
    pub embeddings: EmbeddingKind,
    pub dimension: usize,
    pub translation: TranslationKind,
    pub cac: CacKind,
}

impl Default for Providers {
    fn default() -> Self {
        Providers {
            scorers: ScorerKind::default(),
            tokenizer: TokenizerKind::default(),
            chunk: 3,
            embeddings: EmbeddingKind::default(),
            dimension: 64,
            translation: TranslationKind::default(),
            cac: CacKind::default(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Remote {
    pub command: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Ranking {
    pub beta: f64,
    pub green: f64,
    pub yellow: f64,
}

impl Default for Ranking {
    fn default() -> Self {
        let d = RankParams::default();
        Ranking {
            beta: d.beta,
            green: d.green,
            yellow: d.yellow,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Itermax {
    pub iterations: usize,
    pub alpha: f64,
}

impl Default for Itermax {
    fn default() -> Self {
        let d = AlignParams::default();
        Itermax {
            iterations: d.iterations,
            alpha: d.alpha,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub paths: Paths,
    pub providers: Providers,
    pub remote: Option<Remote>,
    pub ranking: Ranking,
    pub itermax: Itermax,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Everything the service needs, built from a [`Config`].
pub struct Components {
    pub pipeline: Pipeline,
    pub gazetteer: Gazetteer,
    pub categories: CategoryTable,
    pub stopwords: Stopwords,
    pub rank: RankParams,
}

impl Config {
    pub fn parse(src: &str, base_dir: &Path) -> Result<Self> {
        let mut c: Config = toml::from_str(src).map_err(|e| Error::Config(e.to_string()))?;
        c.base_dir = base_dir.to_path_buf();
        c.rank_params().validate()?;
        c.align_params().validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        Self::parse(&src, dir)
    }

    fn resolve(&self, p: &Option<PathBuf>) -> Option<PathBuf> {
        p.as_ref().map(|p| self.base_dir.join(p))
    }

    pub fn rank_params(&self) -> RankParams {
        RankParams {
            beta: self.ranking.beta,
            green: self.ranking.green,
            yellow: self.ranking.yellow,
        }
    }

    pub fn align_params(&self) -> AlignParams {
        AlignParams {
            iterations: self.itermax.iterations,
            alpha: self.itermax.alpha,
        }
    }

    fn remote(&self, cell: &mut Option<Arc<RemoteProvider>>) -> Result<Arc<RemoteProvider>> {
        if let Some(r) = cell {
            return Ok(r.clone());
        }
        let cmd = self
            .remote
            .as_ref()
            .map(|r| r.command.as_slice())
            .unwrap_or_default();
        let (program, args) = cmd
            .split_first()
            .ok_or_else(|| Error::Config("a remote provider needs [remote] command".into()))?;
        let r = Arc::new(RemoteProvider::spawn(program, args)?);
        *cell = Some(r.clone());
        Ok(r)
    }

    pub fn ontology(&self) -> Result<Ontology> {
        match self.resolve(&self.paths.ontology) {
            Some(p) => Ontology::load(&p),
            None => builtin::ontology(),
        }
    }

    pub fn providers(&self, ontology: &Ontology) -> Result<ProviderRegistry> {
        let p = &self.providers;
        let mut remote = None;
        let rules: Arc<RuleScorers> = Arc::new(match self.resolve(&self.paths.rules) {
            Some(path) => load_rule_scorer(&path, ontology)?,
            None => builtin::rule_scorers(ontology)?,
        });
        let mut reg = ProviderRegistry::from_rules(rules);
        if p.scorers == ScorerKind::Remote {
            let r = self.remote(&mut remote)?;
            reg = reg
                .with_anchor_scorer(r.clone())
                .with_argument_scorer(r.clone())
                .with_pair_scorer(r.clone())
                .with_qa_scorer(r);
        }

        reg = match p.tokenizer {
            TokenizerKind::Rule => {
                let chunk = (p.chunk > 0).then_some(p.chunk);
                let t = match self.resolve(&self.paths.lexicon) {
                    Some(path) => RuleTokenizer::new(chunk).load_lexicon(&path)?,
                    None => RuleTokenizer::new(chunk).with_lexicon(builtin::lexicon()),
                };
                reg.with_tokenizer(Arc::new(t))
            }
            TokenizerKind::Remote => reg.with_tokenizer(self.remote(&mut remote)?),
        };

        if p.dimension < 8 {
            return Err(Error::Config("embeddings need dimension >= 8".into()));
        }
        let dictionary = Arc::new(match self.resolve(&self.paths.dictionary) {
            Some(path) => DictionaryTranslator::load(&path)?,
            None => DictionaryTranslator::parse(builtin::DICTIONARY, "<builtin dictionary>")?,
        });
        let embeddings: Arc<dyn EmbeddingProvider> = match p.embeddings {
            EmbeddingKind::Hashed => Arc::new(HashedEmbeddings::new(p.dimension)),
            EmbeddingKind::Gloss => Arc::new(GlossEmbeddings::new(dictionary.clone(), p.dimension)),
            EmbeddingKind::Table => {
                let path = self
                    .resolve(&self.paths.embeddings)
                    .ok_or_else(|| Error::Config("table embeddings need paths.embeddings".into()))?;
                Arc::new(TableEmbeddings::load(&path)?)
            }
            EmbeddingKind::Remote => self.remote(&mut remote)?,
        };
        reg = reg.with_embeddings(embeddings.clone());

        reg = match p.translation {
            TranslationKind::Identity => reg.with_translation(Arc::new(IdentityTranslator)),
            TranslationKind::Dictionary => reg.with_translation(dictionary),
            TranslationKind::Remote => reg.with_translation(self.remote(&mut remote)?),
        };

        reg = match p.cac {
            CacKind::Embedding => reg.with_cac(Arc::new(EmbeddingCac::new(embeddings))),
            CacKind::Lexical => reg.with_cac(Arc::new(LexicalCac)),
            CacKind::Table => {
                let path = self
                    .resolve(&self.paths.cac_table)
                    .ok_or_else(|| Error::Config("table cac needs paths.cac_table".into()))?;
                reg.with_cac(Arc::new(TableCac::load(&path)?))
            }
            CacKind::Remote => reg.with_cac(self.remote(&mut remote)?),
        };
        Ok(reg)
    }

    pub fn build(&self) -> Result<Components> {
        let ontology = self.ontology()?;
        let providers = self.providers(&ontology)?;
        let mut pipeline = Pipeline::new(Arc::new(ontology), providers);
        pipeline.label_stats = match self.resolve(&self.paths.label_stats) {
            Some(p) => LabelStats::load(&p)?,
            None => builtin::label_stats()?,
        };
        pipeline.align = self.align_params();
        Ok(Components {
            pipeline,
            gazetteer: match self.resolve(&self.paths.gazetteer) {
                Some(p) => Gazetteer::load(&p)?,
                None => builtin::gazetteer()?,
            },
            categories: match self.resolve(&self.paths.categories) {
                Some(p) => CategoryTable::load(&p)?,
                None => builtin::categories()?,
            },
            stopwords: match self.resolve(&self.paths.stopwords) {
                Some(p) => Stopwords::load(&p)?,
                None => builtin::stopwords(),
            },
            rank: self.rank_params(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_build() {
        let c = Config::parse("", Path::new(".")).unwrap();
        let parts = c.build().unwrap();
        assert_eq!(parts.rank, RankParams::default());
        let ids = parts.pipeline.providers.ids();
        assert_eq!(ids["cac"], "lexical-cac");
        assert_eq!(ids["translation"], "dictionary-translation");
    }

    #[test]
    fn rejects_bad_values() {
        assert!(Config::parse("[ranking]\nbeta = 1.5\n", Path::new(".")).is_err());
        assert!(Config::parse("[itermax]\nalpha = 0.0\n", Path::new(".")).is_err());
        assert!(Config::parse("[providers]\ncac = \"magic\"\n", Path::new(".")).is_err());
        let remote = Config::parse("[providers]\ntranslation = \"remote\"\n", Path::new(".")).unwrap();
        assert!(matches!(remote.build(), Err(Error::Config(_))));
    }
}
