//! The deployable engine: configuration, corpus ingestion and the HTTP API.

pub mod config;
pub mod http;
pub mod ingest;

use crate::error::Result;
use crate::index::{search, DocRecord, EventIndex, Gazetteer, Query, RankParams, SearchHit};
use crate::pipeline::{index_result, Pipeline};
use crate::query::{nl_to_query, parse_structured, Stopwords, StructuredForm};
use crate::schema::ExtractionResult;
use crate::summarize::CategoryTable;

pub use config::{Components, Config};
pub use ingest::{ingest_file, ingest_jsonl, IngestReport};

pub const DEFAULT_K: usize = 20;

pub struct Engine {
    pub pipeline: Pipeline,
    pub index: EventIndex,
    pub gazetteer: Gazetteer,
    pub categories: CategoryTable,
    pub stopwords: Stopwords,
    pub rank: RankParams,
}

impl Engine {
    pub fn new(parts: Components, index: EventIndex) -> Self {
        Engine {
            pipeline: parts.pipeline,
            index,
            gazetteer: parts.gazetteer,
            categories: parts.categories,
            stopwords: parts.stopwords,
            rank: parts.rank,
        }
    }

    /// Built-in data and providers.
    pub fn builtin(index: EventIndex) -> Result<Self> {
        Ok(Self::new(Config::default().build()?, index))
    }

    /// Extract, translate and build the index record for one document.
    pub fn process(&self, id: &str, language: &str, text: &str) -> Result<DocRecord> {
        let mut extraction = self.pipeline.extract(id, language, text)?;
        self.pipeline.translate(&mut extraction);
        self.record(extraction)
    }

    pub fn record(&self, extraction: ExtractionResult) -> Result<DocRecord> {
        let events = index_result(&extraction, &self.gazetteer)?;
        Ok(DocRecord { extraction, events })
    }

    pub fn structured_query(&self, form: &StructuredForm) -> Result<Query> {
        parse_structured(form, &self.pipeline.ontology)
    }

    pub fn nl_query(&self, text: &str) -> Result<Query> {
        nl_to_query(text, &self.pipeline, &self.stopwords)
    }

    pub fn search(&self, query: &Query, k: usize) -> Result<Vec<SearchHit>> {
        let snapshot = self.index.snapshot();
        let cac = self.pipeline.providers.cac.get();
        search(query, snapshot.events(), &*cac, &self.rank, k)
    }
}
