//! Brute-force reference implementations used to check the fast paths.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use climafact::corpus::PassageStore;
use climafact::dense::EmbeddingMatrix;

/// Scores every passage from scratch; the query is a multiset of words.
pub fn bm25_exhaustive(store: &PassageStore, query: &[&str], k1: f64, b: f64) -> Vec<(u64, f64)> {
    let docs: Vec<Vec<&str>> = store
        .passages()
        .iter()
        .map(|p| p.text.split_whitespace().collect())
        .collect();
    let n = docs.len() as f64;
    let avgdl = docs.iter().map(Vec::len).sum::<usize>() as f64 / n;
    let df: Vec<f64> = query
        .iter()
        .map(|term| docs.iter().filter(|d| d.contains(term)).count() as f64)
        .collect();
    let mut scored: Vec<(u64, f64)> = store
        .passages()
        .iter()
        .zip(&docs)
        .map(|(p, words)| {
            let dl = words.len() as f64;
            let score = query
                .iter()
                .zip(&df)
                .map(|(term, &df)| {
                    if df == 0.0 {
                        return 0.0;
                    }
                    let tf = words.iter().filter(|w| *w == term).count() as f64;
                    let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
                    idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * dl / avgdl))
                })
                .sum::<f64>();
            (p.passage_id, score)
        })
        .filter(|&(_, s)| s > 0.0)
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored
}

pub fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f32> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn random_embeddings(ids: impl Iterator<Item = u64>, dim: usize, seed: u64) -> EmbeddingMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = EmbeddingMatrix::new(dim);
    for id in ids {
        m.push(id, gaussian(&mut rng, dim)).unwrap();
    }
    m
}

fn sign(x: f32) -> bool {
    x >= 0.0
}

/// Linear Hamming scan over raw vectors: (distance, id) ascending.
pub fn hamming_scan(embeddings: &EmbeddingMatrix, query: &[f32], n: usize) -> Vec<u64> {
    let mut d: Vec<(u32, u64)> = embeddings
        .rows
        .iter()
        .map(|(id, v)| {
            let dist = v
                .iter()
                .zip(query)
                .filter(|(a, b)| sign(**a) != sign(**b))
                .count() as u32;
            (dist, *id)
        })
        .collect();
    d.sort();
    d.into_iter().take(n).map(|(_, id)| id).collect()
}

/// Exhaustive inner product of the query with every ±1 code.
pub fn signed_ranking(embeddings: &EmbeddingMatrix, query: &[f32], k: usize) -> Vec<(u64, f64)> {
    let mut s: Vec<(u64, f64)> = embeddings
        .rows
        .iter()
        .map(|(id, v)| {
            let score = v
                .iter()
                .zip(query)
                .map(|(p, q)| {
                    if sign(*p) {
                        f64::from(*q)
                    } else {
                        -f64::from(*q)
                    }
                })
                .sum();
            (*id, score)
        })
        .collect();
    s.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    s.truncate(k);
    s
}

/// Item-by-annotator ratings drawn uniformly from `values`.
pub fn random_ratings(
    rng: &mut ChaCha8Rng,
    items: usize,
    annotators: usize,
    values: &[&str],
) -> HashMap<(usize, usize), String> {
    use rand::Rng;
    let mut out = HashMap::new();
    for i in 0..items {
        for a in 0..annotators {
            out.insert((i, a), values[rng.gen_range(0..values.len())].to_string());
        }
    }
    out
}
