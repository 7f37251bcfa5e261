use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;

use super::rouge::Prf;
use crate::error::{Error, Result};
use crate::service::ServiceClient;

/// Contextual token embeddings for one text; rows are L2-normalized on
/// construction (all-zero rows stay zero).
#[derive(Debug, Clone, PartialEq)]
pub struct TokenEmbeddings {
    tokens: Vec<String>,
    dim: usize,
    rows: Vec<f64>,
}

impl TokenEmbeddings {
    pub fn new(tokens: Vec<String>, vectors: Vec<Vec<f32>>) -> Result<Self> {
        if tokens.len() != vectors.len() {
            return Err(Error::invalid(format!(
                "{} tokens but {} vectors",
                tokens.len(),
                vectors.len()
            )));
        }
        let dim = vectors.first().map_or(0, Vec::len);
        let mut rows = Vec::with_capacity(tokens.len() * dim);
        for v in &vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: v.len(),
                });
            }
            let norm = v.iter().map(|&x| f64::from(x).powi(2)).sum::<f64>().sqrt();
            rows.extend(
                v.iter()
                    .map(|&x| if norm > 0.0 { f64::from(x) / norm } else { 0.0 }),
            );
        }
        Ok(TokenEmbeddings { tokens, dim, rows })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }
}

fn cosine_matrix(a: &TokenEmbeddings, b: &TokenEmbeddings) -> Vec<Vec<f64>> {
    (0..a.len())
        .map(|i| {
            (0..b.len())
                .map(|j| a.row(i).iter().zip(b.row(j)).map(|(x, y)| x * y).sum())
                .collect()
        })
        .collect()
}

/// Greedy-matching BERTScore of one candidate against one reference.
pub fn bert_score(candidate: &TokenEmbeddings, reference: &TokenEmbeddings) -> Result<Prf> {
    if candidate.is_empty() || reference.is_empty() {
        return Err(Error::invalid("BERTScore needs non-empty token lists"));
    }
    if candidate.dim != reference.dim {
        return Err(Error::DimensionMismatch {
            expected: candidate.dim,
            actual: reference.dim,
        });
    }
    let sim = cosine_matrix(candidate, reference);
    let precision = sim
        .iter()
        .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .sum::<f64>()
        / candidate.len() as f64;
    let recall = (0..reference.len())
        .map(|j| {
            sim.iter()
                .map(|row| row[j])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum::<f64>()
        / reference.len() as f64;
    Ok(Prf::new(precision, recall))
}

/// `(f - baseline) / (1 - baseline)`.
pub fn rescale(f: f64, baseline: f64) -> f64 {
    (f - baseline) / (1.0 - baseline)
}

/// Rescaled F against the best-matching reference.
pub fn bert_score_rescaled(
    candidate: &TokenEmbeddings,
    references: &[TokenEmbeddings],
    baseline: f64,
) -> Result<f64> {
    if baseline >= 1.0 {
        return Err(Error::invalid(format!(
            "rescale baseline must be < 1, got {baseline}"
        )));
    }
    if references.is_empty() {
        return Err(Error::invalid("BERTScore needs at least one reference"));
    }
    let mut best = f64::NEG_INFINITY;
    for r in references {
        best = best.max(rescale(bert_score(candidate, r)?.f1, baseline));
    }
    Ok(best)
}

#[derive(Deserialize)]
struct TableRow {
    text: String,
    tokens: Vec<String>,
    vectors: Vec<Vec<f32>>,
}

/// Where token embeddings come from.
pub enum EmbeddingSource {
    /// Precomputed, keyed by exact text.
    Table(HashMap<String, TokenEmbeddings>),
    Remote(ServiceClient),
}

impl EmbeddingSource {
    /// Reads JSONL rows of `{"text", "tokens", "vectors"}`.
    pub fn load_table(path: impl AsRef<Path>) -> Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        let mut table = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: TableRow = serde_json::from_str(&line).map_err(|e| Error::Malformed {
                line: i as u64 + 1,
                message: e.to_string(),
            })?;
            table.insert(row.text, TokenEmbeddings::new(row.tokens, row.vectors)?);
        }
        Ok(EmbeddingSource::Table(table))
    }

    pub fn embed(&self, texts: &[String]) -> Result<Vec<TokenEmbeddings>> {
        match self {
            EmbeddingSource::Table(table) => texts
                .iter()
                .map(|t| {
                    table.get(t).cloned().ok_or_else(|| {
                        Error::invalid(format!("no token embeddings for text {t:?}"))
                    })
                })
                .collect(),
            EmbeddingSource::Remote(client) => client.encode_tokens(texts),
        }
    }
}

/// Rescaled BERTScore with a fixed embedding source and baseline.
pub struct BertScorer {
    pub source: EmbeddingSource,
    pub baseline: f64,
}

impl BertScorer {
    pub fn score(&self, candidate: &str, references: &[String]) -> Result<f64> {
        let mut texts = Vec::with_capacity(references.len() + 1);
        texts.push(candidate.to_string());
        texts.extend(references.iter().cloned());
        let mut embs = self.source.embed(&texts)?;
        let refs = embs.split_off(1);
        bert_score_rescaled(&embs[0], &refs, self.baseline)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn emb(vs: &[&[f32]]) -> TokenEmbeddings {
        TokenEmbeddings::new(
            (0..vs.len()).map(|i| format!("t{i}")).collect(),
            vs.iter().map(|v| v.to_vec()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn identical_embeddings_are_a_fixed_point() {
        let a = emb(&[&[1.0, 2.0, 0.0], &[0.0, -1.0, 3.0]]);
        for b in [0.0, 0.5, 0.85, -2.0] {
            let s = bert_score_rescaled(&a, std::slice::from_ref(&a), b).unwrap();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn orthogonal_tokens_rescale_below_zero() {
        let c = emb(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]]);
        let r = emb(&[&[0.0, 0.0, 1.0, 0.0], &[0.0, 0.0, 0.0, 1.0]]);
        assert_eq!(bert_score(&c, &r).unwrap().f1, 0.0);
        let s = bert_score_rescaled(&c, &[r], 0.85).unwrap();
        assert!((s - (-17.0 / 3.0)).abs() < 1e-9);
    }

    #[test]
    fn errors() {
        let a = emb(&[&[1.0, 0.0]]);
        let empty = TokenEmbeddings::new(vec![], vec![]).unwrap();
        assert!(bert_score(&a, &empty).is_err());
        assert!(bert_score_rescaled(&a, std::slice::from_ref(&a), 1.0).is_err());
        assert!(bert_score(&a, &emb(&[&[1.0, 0.0, 0.0]])).is_err());
        assert!(TokenEmbeddings::new(vec!["x".into()], vec![]).is_err());
    }

    proptest! {
        #[test]
        fn rescaling_preserves_order(f1 in -1.0f64..1.0, f2 in -1.0f64..1.0, b in -0.5f64..0.99) {
            if f1 < f2 {
                prop_assert!(rescale(f1, b) <= rescale(f2, b));
            }
        }
    }
}
