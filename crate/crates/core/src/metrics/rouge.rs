use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::sparse::tokenize;

/// Precision, recall and their harmonic mean.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn new(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall != 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Prf {
            precision,
            recall,
            f1,
        }
    }

    fn from_overlap(overlap: usize, candidate_len: usize, reference_len: usize) -> Self {
        if candidate_len == 0 || reference_len == 0 {
            return Prf::default();
        }
        Prf::new(
            overlap as f64 / candidate_len as f64,
            overlap as f64 / reference_len as f64,
        )
    }
}

/// A candidate text scored against one or more references.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoredPair {
    pub candidate: String,
    pub references: Vec<String>,
}

impl ScoredPair {
    pub fn new(candidate: impl Into<String>, references: Vec<String>) -> Result<Self> {
        if references.is_empty() {
            return Err(Error::invalid("a scored pair needs at least one reference"));
        }
        Ok(ScoredPair {
            candidate: candidate.into(),
            references,
        })
    }
}

/// Best reference by F1; the first wins ties.
fn best_over_references(pair: &ScoredPair, score: impl Fn(&[String], &[String]) -> Prf) -> Prf {
    let candidate = tokenize(&pair.candidate);
    pair.references
        .iter()
        .map(|r| score(&candidate, &tokenize(r)))
        .fold(None, |best: Option<Prf>, s| match best {
            Some(b) if b.f1 >= s.f1 => Some(b),
            _ => Some(s),
        })
        .unwrap_or_default()
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if n > 0 && tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped n-gram overlap between token sequences.
pub fn rouge_n_tokens(candidate: &[String], reference: &[String], n: usize) -> Prf {
    let cand = ngram_counts(candidate, n);
    let refs = ngram_counts(reference, n);
    let overlap: usize = cand
        .iter()
        .map(|(gram, &c)| c.min(refs.get(gram).copied().unwrap_or(0)))
        .sum();
    Prf::from_overlap(
        overlap,
        candidate.len().saturating_sub(n - 1),
        reference.len().saturating_sub(n - 1),
    )
}

pub fn rouge_n(pair: &ScoredPair, n: usize) -> Prf {
    best_over_references(pair, |c, r| rouge_n_tokens(c, r, n))
}

pub fn lcs_len(a: &[String], b: &[String]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn rouge_l_tokens(candidate: &[String], reference: &[String]) -> Prf {
    Prf::from_overlap(
        lcs_len(candidate, reference),
        candidate.len(),
        reference.len(),
    )
}

pub fn rouge_l(pair: &ScoredPair) -> Prf {
    best_over_references(pair, rouge_l_tokens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pair(c: &str, refs: &[&str]) -> ScoredPair {
        ScoredPair::new(c, refs.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    // Naive exponential LCS used only as an oracle on short inputs.
    fn lcs_brute(a: &[String], b: &[String]) -> usize {
        match (a.split_first(), b.split_first()) {
            (Some((x, ar)), Some((y, br))) => {
                if x == y {
                    1 + lcs_brute(ar, br)
                } else {
                    lcs_brute(ar, b).max(lcs_brute(a, br))
                }
            }
            _ => 0,
        }
    }

    #[test]
    fn worked_pair() {
        let p = pair("the cat sat on mat", &["the cat is on the mat"]);
        let r1 = rouge_n(&p, 1);
        assert!((r1.precision - 0.8).abs() < 1e-12);
        assert!((r1.recall - 4.0 / 6.0).abs() < 1e-12);
        assert!((r1.f1 - 8.0 / 11.0).abs() < 1e-12);
        let rl = rouge_l(&p);
        assert!((rl.f1 - 8.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn identity_and_disjoint() {
        let p = pair("ocean heat content rises", &["ocean heat content rises"]);
        assert_eq!(rouge_n(&p, 1).f1, 1.0);
        assert_eq!(rouge_n(&p, 2).f1, 1.0);
        assert_eq!(rouge_l(&p).f1, 1.0);
        let q = pair("alpha beta", &["gamma delta"]);
        assert_eq!(rouge_n(&q, 1).f1, 0.0);
        assert_eq!(rouge_l(&q).f1, 0.0);
    }

    #[test]
    fn empty_candidate_scores_zero() {
        assert_eq!(rouge_n(&pair("", &["a b"]), 1), Prf::default());
        assert_eq!(rouge_l(&pair("", &["a b"])), Prf::default());
        assert!(ScoredPair::new("x", vec![]).is_err());
    }

    #[test]
    fn reversed_distinct_tokens_have_unit_lcs() {
        let p = pair("e d c b a", &["a b c d e"]);
        assert!((rouge_l(&p).recall - 0.2).abs() < 1e-12);
    }

    #[test]
    fn max_over_references() {
        let p = pair("sea level rise", &["unrelated text", "sea level rise"]);
        assert_eq!(rouge_n(&p, 1).f1, 1.0);
    }

    fn tokens() -> impl Strategy<Value = Vec<String>> {
        proptest::collection::vec(
            prop_oneof!["a", "b", "c", "d"].prop_map(String::from),
            0..10,
        )
    }

    proptest! {
        #[test]
        fn lcs_matches_brute_force(a in tokens(), b in tokens()) {
            prop_assert_eq!(lcs_len(&a, &b), lcs_brute(&a, &b));
        }

        #[test]
        fn rouge_bounds_and_ordering(a in tokens(), b in tokens()) {
            let r1 = rouge_n_tokens(&a, &b, 1);
            let rl = rouge_l_tokens(&a, &b);
            for v in [r1.precision, r1.recall, r1.f1, rl.precision, rl.recall, rl.f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert!(rl.recall <= r1.recall + 1e-12);
        }

        #[test]
        fn reference_order_does_not_matter(c in tokens(), r1 in tokens(), r2 in tokens()) {
            let refs = vec![r1.join(" "), r2.join(" ")];
            let mut rev = refs.clone();
            rev.reverse();
            let a = ScoredPair::new(c.join(" "), refs).unwrap();
            let b = ScoredPair::new(c.join(" "), rev).unwrap();
            prop_assert_eq!(rouge_n(&a, 1).f1, rouge_n(&b, 1).f1);
            prop_assert_eq!(rouge_l(&a).f1, rouge_l(&b).f1);
        }
    }
}
