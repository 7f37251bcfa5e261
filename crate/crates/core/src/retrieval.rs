//! Shared retrieval types used by both the sparse and dense retrievers.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetrievalHit {
    pub passage_id: u64,
    pub score: f64,
    /// 1-based.
    pub rank: usize,
}

/// A claim as seen by a retriever. `ordinal` is the claim's position in its
/// dataset file; dense retrievers key precomputed query vectors by it.
#[derive(Debug, Clone, Copy)]
pub struct Query<'a> {
    pub ordinal: u64,
    pub text: &'a str,
}

pub trait Retriever: Sync {
    fn retrieve(&self, query: &Query<'_>, k: usize) -> Result<Vec<RetrievalHit>>;
}

/// Descending score, then ascending passage id.
pub(crate) fn hit_order(a: &(u64, f64), b: &(u64, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

/// Keeps the best `k` of `scored` under [`hit_order`] and assigns ranks.
pub(crate) fn top_k_hits(mut scored: Vec<(u64, f64)>, k: usize) -> Vec<RetrievalHit> {
    if k == 0 || scored.is_empty() {
        return Vec::new();
    }
    if scored.len() > k {
        scored.select_nth_unstable_by(k - 1, hit_order);
        scored.truncate(k);
    }
    scored.sort_unstable_by(hit_order);
    scored
        .into_iter()
        .enumerate()
        .map(|(i, (passage_id, score))| RetrievalHit {
            passage_id,
            score,
            rank: i + 1,
        })
        .collect()
}
