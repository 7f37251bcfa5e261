use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::binio;
use crate::corpus::PassageSource;
use crate::error::{Error, Result};
use crate::retrieval::{top_k_hits, RetrievalHit};

use super::tokenize;

pub const INDEX_MAGIC: &[u8; 8] = b"CFIX0001";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub passage_id: u64,
    pub tf: u32,
}

/// Okapi BM25 saturation and length-normalization parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvertedIndex {
    postings: HashMap<String, Vec<Posting>>,
    doc_lengths: Vec<u32>,
    avgdl: f64,
}

impl InvertedIndex {
    /// Indexes passage text (not titles) of every passage in the source.
    pub fn build(store: &impl PassageSource) -> Result<Self> {
        if store.is_empty() {
            return Err(Error::EmptyStore);
        }
        let mut postings: HashMap<String, Vec<Posting>> = HashMap::new();
        let mut doc_lengths = Vec::with_capacity(store.len() as usize);
        let mut counts: HashMap<String, u32> = HashMap::new();
        for passage_id in 0..store.len() {
            let passage = store.passage(passage_id)?;
            let tokens = tokenize(&passage.text);
            doc_lengths.push(tokens.len() as u32);
            counts.clear();
            for t in tokens {
                *counts.entry(t).or_insert(0) += 1;
            }
            // Ids are visited in ascending order, so every list stays sorted.
            for (term, tf) in counts.drain() {
                postings
                    .entry(term)
                    .or_default()
                    .push(Posting { passage_id, tf });
            }
        }
        Ok(Self::from_parts(postings, doc_lengths))
    }

    fn from_parts(postings: HashMap<String, Vec<Posting>>, doc_lengths: Vec<u32>) -> Self {
        let total: u64 = doc_lengths.iter().map(|&l| u64::from(l)).sum();
        let avgdl = total as f64 / doc_lengths.len() as f64;
        InvertedIndex {
            postings,
            doc_lengths,
            avgdl,
        }
    }

    /// Total number of indexed passages.
    pub fn num_passages(&self) -> u64 {
        self.doc_lengths.len() as u64
    }

    pub fn avgdl(&self) -> f64 {
        self.avgdl
    }

    pub fn num_terms(&self) -> usize {
        self.postings.len()
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map_or(&[], Vec::as_slice)
    }

    pub fn doc_freq(&self, term: &str) -> u64 {
        self.postings(term).len() as u64
    }

    pub fn doc_length(&self, passage_id: u64) -> Result<u32> {
        usize::try_from(passage_id)
            .ok()
            .and_then(|i| self.doc_lengths.get(i))
            .copied()
            .ok_or(Error::NotFound {
                kind: "passage",
                id: passage_id,
            })
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    /// `ln(1 + (N - df + 0.5) / (df + 0.5))`, positive for every `df <= N`.
    pub fn idf(&self, term: &str) -> f64 {
        let n = self.num_passages() as f64;
        let df = self.doc_freq(term) as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    fn term_weight(&self, idf: f64, tf: u32, doc_len: u32, params: Bm25Params) -> f64 {
        let tf = f64::from(tf);
        let norm = 1.0 - params.b + params.b * f64::from(doc_len) / self.avgdl;
        idf * tf * (params.k1 + 1.0) / (tf + params.k1 * norm)
    }

    /// BM25 score of one passage; the query is a multiset, so repeated terms
    /// contribute repeatedly.
    pub fn bm25_score(
        &self,
        query_terms: &[String],
        passage_id: u64,
        params: Bm25Params,
    ) -> Result<f64> {
        let doc_len = self.doc_length(passage_id)?;
        let mut score = 0.0;
        for term in query_terms {
            let list = self.postings(term);
            if let Ok(pos) = list.binary_search_by_key(&passage_id, |p| p.passage_id) {
                score += self.term_weight(self.idf(term), list[pos].tf, doc_len, params);
            }
        }
        Ok(score)
    }

    /// Term-at-a-time scoring over the union of the query terms' postings.
    pub fn search_terms(
        &self,
        query_terms: &[String],
        k: usize,
        params: Bm25Params,
    ) -> Vec<RetrievalHit> {
        if query_terms.is_empty() || k == 0 {
            return Vec::new();
        }
        let mut acc: HashMap<u64, f64> = HashMap::new();
        for term in query_terms {
            let list = self.postings(term);
            if list.is_empty() {
                continue;
            }
            let idf = self.idf(term);
            for p in list {
                let w =
                    self.term_weight(idf, p.tf, self.doc_lengths[p.passage_id as usize], params);
                *acc.entry(p.passage_id).or_insert(0.0) += w;
            }
        }
        top_k_hits(acc.into_iter().collect(), k)
    }

    pub fn search(&self, query_text: &str, k: usize) -> Vec<RetrievalHit> {
        self.search_terms(&tokenize(query_text), k, Bm25Params::default())
    }

    /// Terms are written in sorted order so output is byte-identical across runs.
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(INDEX_MAGIC)?;
        binio::write_u64(w, self.num_passages())?;
        for &len in &self.doc_lengths {
            binio::write_u32(w, len)?;
        }
        let mut terms: Vec<&String> = self.postings.keys().collect();
        terms.sort();
        binio::write_u64(w, terms.len() as u64)?;
        for term in terms {
            let list = &self.postings[term];
            binio::write_str(w, term)?;
            binio::write_u64(w, list.len() as u64)?;
            for p in list {
                binio::write_u64(w, p.passage_id)?;
                binio::write_u32(w, p.tf)?;
            }
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> std::io::Result<Self> {
        use std::io::{Error as IoError, ErrorKind};
        binio::expect_magic(r, INDEX_MAGIC)?;
        let n = binio::read_u64(r)?;
        if n == 0 {
            return Err(IoError::new(
                ErrorKind::InvalidData,
                "index has no passages",
            ));
        }
        let mut doc_lengths = Vec::with_capacity(n as usize);
        for _ in 0..n {
            doc_lengths.push(binio::read_u32(r)?);
        }
        let term_count = binio::read_u64(r)?;
        let mut postings = HashMap::with_capacity(term_count as usize);
        for _ in 0..term_count {
            let term = binio::read_str(r)?;
            let len = binio::read_u64(r)?;
            let mut list = Vec::with_capacity(len as usize);
            for _ in 0..len {
                let passage_id = binio::read_u64(r)?;
                let tf = binio::read_u32(r)?;
                if passage_id >= n {
                    return Err(IoError::new(
                        ErrorKind::InvalidData,
                        format!("posting for passage {passage_id} beyond N = {n}"),
                    ));
                }
                list.push(Posting { passage_id, tf });
            }
            postings.insert(term, list);
        }
        Ok(Self::from_parts(postings, doc_lengths))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut r = BufReader::new(File::open(path)?);
        Self::read_from(&mut r).map_err(|e| Error::format(path, e.to_string()))
    }
}
