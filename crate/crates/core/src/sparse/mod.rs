//! Lexical retrieval: tokenizer, inverted index, Okapi BM25 and optional
//! entity-linked query expansion.

mod entity;
mod index;

pub use entity::{ConceptSource, EntityLinker, EntityMention, LinkerConfig};
pub use index::{Bm25Params, InvertedIndex, Posting, INDEX_MAGIC};

use crate::error::Result;
use crate::retrieval::{Query, RetrievalHit, Retriever};

/// Lowercases and splits on every non-alphanumeric character. No stemming,
/// stopwords are kept.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|piece| !piece.is_empty())
        .map(str::to_owned)
        .collect()
}

/// BM25 retriever with optional entity-linked expansion of the query.
pub struct SparseRetriever {
    index: InvertedIndex,
    params: Bm25Params,
    linker: Option<EntityLinker>,
}

impl SparseRetriever {
    pub fn new(index: InvertedIndex) -> Self {
        SparseRetriever {
            index,
            params: Bm25Params::default(),
            linker: None,
        }
    }

    pub fn with_params(mut self, params: Bm25Params) -> Self {
        self.params = params;
        self
    }

    /// Enables entity augmentation.
    pub fn with_linker(mut self, linker: EntityLinker) -> Self {
        self.linker = Some(linker);
        self
    }

    pub fn index(&self) -> &InvertedIndex {
        &self.index
    }

    /// Query terms after optional concept expansion.
    pub fn query_terms(&self, query_text: &str) -> Vec<String> {
        let mut terms = tokenize(query_text);
        if let Some(linker) = &self.linker {
            let mentions = linker.link(query_text);
            terms.extend(linker.concept_terms(&mentions));
        }
        terms
    }

    pub fn search(&self, query_text: &str, k: usize) -> Vec<RetrievalHit> {
        let terms = self.query_terms(query_text);
        self.index.search_terms(&terms, k, self.params)
    }
}

impl Retriever for SparseRetriever {
    fn retrieve(&self, query: &Query<'_>, k: usize) -> Result<Vec<RetrievalHit>> {
        Ok(self.search(query.text, k))
    }
}
