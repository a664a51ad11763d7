//! Event extraction decoding, cross-lingual span projection and
//! event-centric search.
//!
//! Learned components (tokenizers, taggers, pair classifiers, QA heads,
//! embeddings, translation and cross-lingual match confidence) sit behind
//! the provider traits in [`scorers`]. Everything else is deterministic.

// Data-file examples in docs use literal tabs, as the files do.
#![allow(clippy::tabs_in_doc_comments)]

pub mod align;
pub mod builtin;
pub mod document;
pub mod error;
pub mod eval;
pub mod event;
pub mod extract;
pub mod index;
pub mod ontology;
pub mod pipeline;
pub mod query;
pub mod relations;
pub mod schema;
pub mod scorers;
pub mod service;
pub mod span;
pub mod summarize;
pub mod tokenize;

pub use error::{Error, Result};
