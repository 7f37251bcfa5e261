//! Binary passage retrieval over precomputed embeddings.
//!
//! Passage embeddings are binarized by sign into packed 64-bit words.
//! Search runs in two stages: the `n` codes closest in Hamming distance to
//! the binarized query become candidates, then candidates are reranked by
//! the inner product between the continuous query vector and each code
//! expanded to ±1.
//!
//! Embedding files (`PSGEMB01`) are `magic | u32 dim | u64 count` followed by
//! `count` records of `u64 passage_id` and `dim` `f32` values, little-endian.

use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::binio;
use crate::corpus::PassageSource;
use crate::error::{Error, Result};
use crate::retrieval::{top_k_hits, Query, RetrievalHit, Retriever};

pub const EMBEDDING_MAGIC: &[u8; 8] = b"PSGEMB01";
pub const DENSE_INDEX_MAGIC: &[u8; 8] = b"CFDX0001";

/// Rows scanned per worker before partial top-n lists are merged.
const SCAN_CHUNK: usize = 16_384;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub dim: usize,
    pub rows: Vec<(u64, Vec<f32>)>,
}

impl EmbeddingMatrix {
    pub fn new(dim: usize) -> Self {
        EmbeddingMatrix {
            dim,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, passage_id: u64, vector: Vec<f32>) -> Result<()> {
        check_dim(self.dim, vector.len())?;
        self.rows.push((passage_id, vector));
        Ok(())
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(EMBEDDING_MAGIC)?;
        binio::write_u32(w, self.dim as u32)?;
        binio::write_u64(w, self.rows.len() as u64)?;
        for (id, v) in &self.rows {
            check_dim(self.dim, v.len())?;
            binio::write_u64(w, *id)?;
            for &x in v {
                binio::write_f32(w, x)?;
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
        binio::expect_magic(r, EMBEDDING_MAGIC)?;
        let dim = binio::read_u32(r)? as usize;
        let count = binio::read_u64(r)?;
        let mut rows = Vec::with_capacity(count.min(1 << 24) as usize);
        for _ in 0..count {
            let id = binio::read_u64(r)?;
            let mut v = Vec::with_capacity(dim);
            for _ in 0..dim {
                v.push(binio::read_f32(r)?);
            }
            rows.push((id, v));
        }
        Ok(EmbeddingMatrix { dim, rows })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut r = BufReader::new(File::open(path)?);
        Self::read_from(&mut r).map_err(|e| Error::format(path, e.to_string()))
    }
}

fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

fn words_for(dim: usize) -> usize {
    dim.div_ceil(64)
}

/// Sign-binarized embedding, bit `i` stored at `words[i / 64] >> (i % 64)`.
/// Padding bits past `dim` are always zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryCode {
    dim: usize,
    words: Vec<u64>,
}

impl BinaryCode {
    pub fn from_bits(bits: &[bool]) -> Self {
        let mut words = vec![0u64; words_for(bits.len())];
        for (i, &b) in bits.iter().enumerate() {
            if b {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        BinaryCode {
            dim: bits.len(),
            words,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.dim, "bit {i} out of range for dim {}", self.dim);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn complement(&self) -> Self {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        let tail = self.dim % 64;
        if tail != 0 {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
        BinaryCode {
            dim: self.dim,
            words,
        }
    }
}

/// Component `i` maps to bit 1 iff it is `>= 0`.
pub fn binarize(vector: &[f32], dim: usize) -> Result<BinaryCode> {
    check_dim(dim, vector.len())?;
    let bits: Vec<bool> = vector.iter().map(|&x| x >= 0.0).collect();
    Ok(BinaryCode::from_bits(&bits))
}

fn popcount_xor(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum()
}

pub fn hamming_distance(a: &BinaryCode, b: &BinaryCode) -> Result<u32> {
    check_dim(a.dim, b.dim)?;
    Ok(popcount_xor(&a.words, &b.words))
}

/// Inner product of `query` with `code` read as ±1.
fn signed_dot(query: &[f32], words: &[u64]) -> f64 {
    query
        .iter()
        .enumerate()
        .map(|(i, &q)| {
            let q = f64::from(q);
            if words[i / 64] >> (i % 64) & 1 == 1 {
                q
            } else {
                -q
            }
        })
        .sum()
}

/// `max(100, 10 * k)`.
pub fn default_candidates(k: usize) -> usize {
    (10 * k).max(100)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseIndex {
    dim: usize,
    ids: Vec<u64>,
    words: Vec<u64>,
    vectors: Option<Vec<f32>>,
}

impl DenseIndex {
    /// Binarizes every embedding. Ids must exist in `store` and be unique.
    pub fn build(
        store: &impl PassageSource,
        embeddings: &EmbeddingMatrix,
        keep_vectors: bool,
    ) -> Result<Self> {
        if embeddings.rows.is_empty() {
            return Err(Error::NoEmbeddings);
        }
        let dim = embeddings.dim;
        if dim == 0 {
            return Err(Error::invalid("embedding dimension is zero"));
        }
        let mut order: Vec<usize> = (0..embeddings.rows.len()).collect();
        order.sort_by_key(|&i| embeddings.rows[i].0);
        let wpc = words_for(dim);
        let mut index = DenseIndex {
            dim,
            ids: Vec::with_capacity(order.len()),
            words: Vec::with_capacity(order.len() * wpc),
            vectors: keep_vectors.then(|| Vec::with_capacity(order.len() * dim)),
        };
        for i in order {
            let (id, v) = &embeddings.rows[i];
            if *id >= store.len() {
                return Err(Error::NotFound {
                    kind: "passage",
                    id: *id,
                });
            }
            if index.ids.last() == Some(id) {
                return Err(Error::invalid(format!(
                    "duplicate embedding for passage {id}"
                )));
            }
            let code = binarize(v, dim)?;
            index.ids.push(*id);
            index.words.extend_from_slice(&code.words);
            if let Some(vs) = index.vectors.as_mut() {
                vs.extend_from_slice(v);
            }
        }
        Ok(index)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn passage_ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn has_vectors(&self) -> bool {
        self.vectors.is_some()
    }

    fn words_at(&self, row: usize) -> &[u64] {
        let wpc = words_for(self.dim);
        &self.words[row * wpc..(row + 1) * wpc]
    }

    fn row_of(&self, passage_id: u64) -> Result<usize> {
        self.ids
            .binary_search(&passage_id)
            .map_err(|_| Error::NotFound {
                kind: "passage",
                id: passage_id,
            })
    }

    pub fn code(&self, passage_id: u64) -> Result<BinaryCode> {
        let row = self.row_of(passage_id)?;
        Ok(BinaryCode {
            dim: self.dim,
            words: self.words_at(row).to_vec(),
        })
    }

    /// The retained continuous vector, when built with `keep_vectors`.
    pub fn vector(&self, passage_id: u64) -> Result<Option<&[f32]>> {
        let row = self.row_of(passage_id)?;
        Ok(self
            .vectors
            .as_ref()
            .map(|v| &v[row * self.dim..(row + 1) * self.dim]))
    }

    fn scan_top_n(
        &self,
        query: &[u64],
        rows: std::ops::Range<usize>,
        n: usize,
    ) -> BinaryHeap<(u32, u64)> {
        // Max-heap on (distance, id): the root is the current worst keeper.
        let mut heap = BinaryHeap::with_capacity(n + 1);
        for row in rows {
            let entry = (popcount_xor(query, self.words_at(row)), self.ids[row]);
            if heap.len() < n {
                heap.push(entry);
            } else if let Some(&worst) = heap.peek() {
                if entry < worst {
                    heap.pop();
                    heap.push(entry);
                }
            }
        }
        heap
    }

    /// The `n` ids closest to `query_code` by Hamming distance, ties broken
    /// by ascending id. Returns every id when `n` exceeds the index size.
    pub fn candidates(&self, query_code: &BinaryCode, n: usize) -> Result<Vec<u64>> {
        check_dim(self.dim, query_code.dim)?;
        if n == 0 {
            return Err(Error::invalid("candidate count must be at least 1"));
        }
        let n = n.min(self.len());
        let merged: Vec<(u32, u64)> = if self.len() <= SCAN_CHUNK {
            self.scan_top_n(&query_code.words, 0..self.len(), n)
                .into_vec()
        } else {
            let starts: Vec<usize> = (0..self.len()).step_by(SCAN_CHUNK).collect();
            let partial: Vec<Vec<(u32, u64)>> = starts
                .par_iter()
                .map(|&s| {
                    let end = (s + SCAN_CHUNK).min(self.len());
                    self.scan_top_n(&query_code.words, s..end, n).into_vec()
                })
                .collect();
            let mut all: Vec<(u32, u64)> = partial.into_iter().flatten().collect();
            if all.len() > n {
                all.select_nth_unstable(n - 1);
                all.truncate(n);
            }
            all
        };
        let mut merged = merged;
        merged.sort_unstable();
        Ok(merged.into_iter().map(|(_, id)| id).collect())
    }

    /// Scores candidates by the ±1 inner product and keeps the top `k`.
    pub fn rerank(
        &self,
        query_vector: &[f32],
        candidate_ids: &[u64],
        k: usize,
    ) -> Result<Vec<RetrievalHit>> {
        check_dim(self.dim, query_vector.len())?;
        let mut seen = HashSet::with_capacity(candidate_ids.len());
        let mut scored = Vec::with_capacity(candidate_ids.len());
        for &id in candidate_ids {
            if !seen.insert(id) {
                continue;
            }
            let row = self.row_of(id)?;
            scored.push((id, signed_dot(query_vector, self.words_at(row))));
        }
        Ok(top_k_hits(scored, k))
    }

    pub fn search_dense(
        &self,
        query_vector: &[f32],
        k: usize,
        n_candidates: usize,
    ) -> Result<Vec<RetrievalHit>> {
        if k > n_candidates {
            return Err(Error::invalid(format!(
                "k = {k} exceeds the candidate count {n_candidates}"
            )));
        }
        let code = binarize(query_vector, self.dim)?;
        let ids = self.candidates(&code, n_candidates)?;
        self.rerank(query_vector, &ids, k)
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(DENSE_INDEX_MAGIC)?;
        binio::write_u32(w, self.dim as u32)?;
        binio::write_u64(w, self.len() as u64)?;
        w.write_all(&[u8::from(self.vectors.is_some())])?;
        for row in 0..self.len() {
            binio::write_u64(w, self.ids[row])?;
            for &word in self.words_at(row) {
                binio::write_u64(w, word)?;
            }
            if let Some(vs) = &self.vectors {
                for &x in &vs[row * self.dim..(row + 1) * self.dim] {
                    binio::write_f32(w, x)?;
                }
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
        binio::expect_magic(r, DENSE_INDEX_MAGIC)?;
        let dim = binio::read_u32(r)? as usize;
        let count = binio::read_u64(r)? as usize;
        let has_vectors = binio::read_u8(r)? == 1;
        let wpc = words_for(dim);
        let mut index = DenseIndex {
            dim,
            ids: Vec::with_capacity(count),
            words: Vec::with_capacity(count * wpc),
            vectors: has_vectors.then(|| Vec::with_capacity(count * dim)),
        };
        for _ in 0..count {
            let id = binio::read_u64(r)?;
            if index.ids.last().is_some_and(|&last| last >= id) {
                return Err(std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    "codes are not in ascending passage id order",
                ));
            }
            index.ids.push(id);
            for _ in 0..wpc {
                index.words.push(binio::read_u64(r)?);
            }
            if let Some(vs) = index.vectors.as_mut() {
                for _ in 0..dim {
                    vs.push(binio::read_f32(r)?);
                }
            }
        }
        Ok(index)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut r = BufReader::new(File::open(path)?);
        Self::read_from(&mut r).map_err(|e| Error::format(path, e.to_string()))
    }
}

/// Dense retriever with query vectors precomputed per claim ordinal.
pub struct DenseRetriever {
    index: DenseIndex,
    queries: HashMap<u64, Vec<f32>>,
    n_candidates: Option<usize>,
}

impl DenseRetriever {
    pub fn new(index: DenseIndex, queries: EmbeddingMatrix) -> Result<Self> {
        check_dim(index.dim, queries.dim)?;
        Ok(DenseRetriever {
            index,
            queries: queries.rows.into_iter().collect(),
            n_candidates: None,
        })
    }

    /// Fixed candidate depth; defaults to [`default_candidates`] otherwise.
    pub fn with_candidates(mut self, n: usize) -> Self {
        self.n_candidates = Some(n);
        self
    }

    pub fn index(&self) -> &DenseIndex {
        &self.index
    }
}

impl Retriever for DenseRetriever {
    fn retrieve(&self, query: &Query<'_>, k: usize) -> Result<Vec<RetrievalHit>> {
        let vector = self.queries.get(&query.ordinal).ok_or(Error::NotFound {
            kind: "query vector",
            id: query.ordinal,
        })?;
        let n = self
            .n_candidates
            .unwrap_or_else(|| default_candidates(k))
            .max(k);
        self.index.search_dense(vector, k, n)
    }
}
