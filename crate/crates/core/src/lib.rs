//! Retrieval-augmented claim verification with explanation generation.
//!
//! The crate covers everything on the retrieval and evaluation side of a
//! fusion-in-decoder fact checker:
//!
//! * [`corpus`] normalizes a knowledge source and cuts it into 100-word
//!   passages held in a compact, randomly addressable store file.
//! * [`sparse`] builds a BM25 inverted index, optionally expanding queries
//!   with entity-linked concepts.
//! * [`dense`] binarizes passage embeddings and serves Hamming candidate
//!   generation followed by inner-product reranking.
//! * [`dataset`] turns CLIMATE-FEVER and the feedback corpus into
//!   claim/explanation records and deterministic splits.
//! * [`fid`] and [`service`] define the generator wire protocol.
//! * [`metrics`] computes ROUGE, rescaled BERTScore, accuracy and
//!   annotator agreement.
//! * [`harness`] runs experiment grids and writes reports.
//!
//! Runnable walkthroughs live in `examples/`: `ingest_store`, `bm25_search`,
//! `entity_linking`, `dense_search`, `build_dataset`, `fid_protocol`,
//! `explanation_metrics`, `annotator_agreement` and `depth_sweep`.

pub mod corpus;
pub mod dataset;
pub mod dense;
pub mod error;
pub mod fid;
pub mod harness;
pub mod metrics;
pub mod retrieval;
pub mod service;
pub mod sparse;

mod binio;

pub use corpus::{Passage, PassageFile, PassageSource, PassageStore};
pub use dataset::{ClaimRecord, DatasetSplit, VeracityLabel};
pub use dense::{DenseIndex, DenseRetriever, EmbeddingMatrix};
pub use error::{Error, Result};
pub use fid::{FidInput, FidOutput, Generator, GeneratorBackend};
pub use harness::{ExperimentCell, ExperimentConfig};
pub use metrics::EvalReport;
pub use retrieval::{Query, RetrievalHit, Retriever};
pub use service::{ServiceClient, ServiceConfig};
pub use sparse::{InvertedIndex, SparseRetriever};
