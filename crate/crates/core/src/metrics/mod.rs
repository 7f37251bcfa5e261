//! Explanation and veracity metrics, plus retriever diagnostics.

pub mod agreement;
pub mod bertscore;
pub mod rouge;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use agreement::{
    krippendorff_alpha, majority, manual_eval_stats, AnnotationSet, ManualEvalStats, Scale,
};
pub use bertscore::{
    bert_score, bert_score_rescaled, rescale, BertScorer, EmbeddingSource, TokenEmbeddings,
};
pub use rouge::{lcs_len, rouge_l, rouge_l_tokens, rouge_n, rouge_n_tokens, Prf, ScoredPair};

use crate::dataset::{ClaimRecord, VeracityLabel};
use crate::error::{Error, Result};
use crate::fid::{parse_output, FidOutput};
use crate::retrieval::RetrievalHit;

/// Label printed for outputs that carry no parseable veracity label.
pub const UNPARSEABLE: &str = "UNPARSEABLE";

/// Fraction of predictions equal to gold. `None` never matches.
pub fn accuracy(predictions: &[Option<VeracityLabel>], gold: &[VeracityLabel]) -> Result<f64> {
    if predictions.len() != gold.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} gold labels",
            predictions.len(),
            gold.len()
        )));
    }
    if gold.is_empty() {
        return Err(Error::invalid("accuracy over an empty set"));
    }
    let correct = predictions
        .iter()
        .zip(gold)
        .filter(|(p, g)| **p == Some(**g))
        .count();
    Ok(correct as f64 / gold.len() as f64)
}

/// Fraction of queries with at least one gold passage among the first `k` hits.
pub fn recall_at_k(hits: &[Vec<RetrievalHit>], gold: &[HashSet<u64>], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("recall@k needs k >= 1"));
    }
    if hits.len() != gold.len() {
        return Err(Error::invalid(format!(
            "{} hit lists for {} gold sets",
            hits.len(),
            gold.len()
        )));
    }
    if hits.is_empty() {
        return Ok(0.0);
    }
    let found = hits
        .iter()
        .zip(gold)
        .filter(|(h, g)| h.iter().take(k).any(|hit| g.contains(&hit.passage_id)))
        .count();
    Ok(found as f64 / hits.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "rouge1")]
    Rouge1,
    #[serde(rename = "rougeL")]
    RougeL,
    #[serde(rename = "acc")]
    Acc,
    #[serde(rename = "bscore")]
    BScore,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Rouge1 => "rouge1",
            Metric::RougeL => "rougeL",
            Metric::Acc => "acc",
            Metric::BScore => "bscore",
        }
    }

    /// Parses a comma-separated list such as `rouge1,rougeL,acc`.
    pub fn parse_list(s: &str) -> Result<Vec<Metric>> {
        let mut out: Vec<Metric> = Vec::new();
        for m in s.split(',').map(str::trim).filter(|m| !m.is_empty()) {
            let m = m.parse()?;
            if !out.contains(&m) {
                out.push(m);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rouge1" => Ok(Metric::Rouge1),
            "rougeL" | "rougel" => Ok(Metric::RougeL),
            "acc" => Ok(Metric::Acc),
            "bscore" => Ok(Metric::BScore),
            other => Err(Error::invalid(format!("unknown metric {other:?}"))),
        }
    }
}

/// Per-record scores; a metric that was not computed stays `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecordScores {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rouge1: Option<f64>,
    #[serde(rename = "rougeL", skip_serializing_if = "Option::is_none")]
    pub rouge_l: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bscore: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correct: Option<bool>,
}

/// Aggregates over the evaluated records; each populated field is a mean.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_score_rs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rouge1_f: Option<f64>,
    #[serde(rename = "rougeL_f", skip_serializing_if = "Option::is_none")]
    pub rouge_l_f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recall_at_k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_agree: Option<f64>,
    #[serde(default)]
    pub counts: BTreeMap<String, usize>,
}

fn mean(values: impl Iterator<Item = f64>) -> (Option<f64>, usize) {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    ((n > 0).then(|| sum / n as f64), n)
}

impl EvalReport {
    /// Means over `scores` in slice order.
    pub fn from_scores(scores: &[RecordScores]) -> Self {
        let mut report = EvalReport::default();
        let mut put = |name: &str, (value, n): (Option<f64>, usize)| {
            if n > 0 {
                report.counts.insert(name.to_string(), n);
            }
            value
        };
        let rouge1 = put("rouge1", mean(scores.iter().filter_map(|s| s.rouge1)));
        let rouge_l = put("rougeL", mean(scores.iter().filter_map(|s| s.rouge_l)));
        let bscore = put("bscore", mean(scores.iter().filter_map(|s| s.bscore)));
        let acc = put(
            "acc",
            mean(
                scores
                    .iter()
                    .filter_map(|s| s.correct.map(|c| f64::from(u8::from(c)))),
            ),
        );
        report.rouge1_f = rouge1;
        report.rouge_l_f = rouge_l;
        report.b_score_rs = bscore;
        report.accuracy = acc;
        report
    }

    /// Unweighted mean of several reports, field by field.
    pub fn average(reports: &[EvalReport]) -> Self {
        fn avg(reports: &[EvalReport], f: impl Fn(&EvalReport) -> Option<f64>) -> Option<f64> {
            mean(reports.iter().filter_map(f)).0
        }
        let mut counts = BTreeMap::new();
        for r in reports {
            for (k, v) in &r.counts {
                *counts.entry(k.clone()).or_insert(0) += v;
            }
        }
        EvalReport {
            b_score_rs: avg(reports, |r| r.b_score_rs),
            rouge1_f: avg(reports, |r| r.rouge1_f),
            rouge_l_f: avg(reports, |r| r.rouge_l_f),
            accuracy: avg(reports, |r| r.accuracy),
            recall_at_k: avg(reports, |r| r.recall_at_k),
            alpha: avg(reports, |r| r.alpha),
            mar: avg(reports, |r| r.mar),
            v_agree: avg(reports, |r| r.v_agree),
            counts,
        }
    }
}

/// Scores one generated output against its claim record. ACC is only
/// computed when the record's label is usable.
pub fn score_record(
    output: &FidOutput,
    record: &ClaimRecord,
    metrics: &[Metric],
    scorer: Option<&BertScorer>,
) -> Result<RecordScores> {
    let mut scores = RecordScores::default();
    let needs_pair = metrics
        .iter()
        .any(|m| matches!(m, Metric::Rouge1 | Metric::RougeL));
    let pair = if needs_pair {
        Some(ScoredPair::new(
            output.explanation.clone(),
            record.references.clone(),
        )?)
    } else {
        None
    };
    for m in metrics {
        match m {
            Metric::Rouge1 => scores.rouge1 = pair.as_ref().map(|p| rouge_n(p, 1).f1),
            Metric::RougeL => scores.rouge_l = pair.as_ref().map(|p| rouge_l(p).f1),
            Metric::Acc => {
                if record.label_usable {
                    scores.correct = Some(output.label == Some(record.overall_label));
                }
            }
            Metric::BScore => {
                let scorer = scorer
                    .ok_or_else(|| Error::invalid("bscore requested without token embeddings"))?;
                scores.bscore = Some(scorer.score(&output.explanation, &record.references)?);
            }
        }
    }
    Ok(scores)
}

/// One line of `predictions.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub claim_id: String,
    pub raw: String,
    /// Label name, or `UNPARSEABLE`. Empty means "parse from `raw`".
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub explanation: String,
    #[serde(default)]
    pub scores: RecordScores,
}

impl PredictionRow {
    pub fn new(claim_id: impl Into<String>, output: &FidOutput, scores: RecordScores) -> Self {
        PredictionRow {
            claim_id: claim_id.into(),
            raw: output.raw.clone(),
            label: output
                .label
                .map_or(UNPARSEABLE, VeracityLabel::as_str)
                .to_string(),
            explanation: output.explanation.clone(),
            scores,
        }
    }

    pub fn output(&self) -> FidOutput {
        if self.label.is_empty() {
            return parse_output(&self.raw);
        }
        FidOutput {
            label: self.label.parse().ok(),
            explanation: self.explanation.clone(),
            raw: self.raw.clone(),
        }
    }
}

/// Scores stored predictions against a dataset, matching by `claim_id`.
pub fn evaluate_predictions(
    predictions: &[PredictionRow],
    dataset: &[ClaimRecord],
    metrics: &[Metric],
    scorer: Option<&BertScorer>,
) -> Result<(EvalReport, Vec<PredictionRow>)> {
    let by_id: HashMap<&str, &ClaimRecord> =
        dataset.iter().map(|r| (r.claim_id.as_str(), r)).collect();
    let rows: Vec<PredictionRow> = predictions
        .par_iter()
        .map(|p| {
            let record = by_id.get(p.claim_id.as_str()).ok_or_else(|| {
                Error::invalid(format!("prediction for unknown claim {:?}", p.claim_id))
            })?;
            let output = p.output();
            let scores = score_record(&output, record, metrics, scorer)?;
            Ok(PredictionRow::new(p.claim_id.clone(), &output, scores))
        })
        .collect::<Result<_>>()?;
    let scores: Vec<RecordScores> = rows.iter().map(|r| r.scores.clone()).collect();
    Ok((EvalReport::from_scores(&scores), rows))
}
