//! Inter-annotator agreement and the manual-evaluation summaries.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Nominal,
    Ordinal,
}

/// Ratings keyed by (item, annotator). Missing ratings are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationSet {
    pub scale: Scale,
    ratings: BTreeMap<(String, String), String>,
}

#[derive(Deserialize)]
struct AnnotationRow {
    item_id: String,
    annotator_id: String,
    task: String,
    value: String,
}

impl AnnotationSet {
    pub fn new(scale: Scale) -> Self {
        AnnotationSet {
            scale,
            ratings: BTreeMap::new(),
        }
    }

    pub fn rate(
        &mut self,
        item: impl Into<String>,
        annotator: impl Into<String>,
        value: impl Into<String>,
    ) -> Result<()> {
        let value = value.into();
        if self.scale == Scale::Ordinal && value.trim().parse::<f64>().is_err() {
            return Err(Error::invalid(format!(
                "ordinal rating {value:?} is not numeric"
            )));
        }
        self.ratings
            .insert((item.into(), annotator.into()), value.trim().to_string());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ratings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratings.is_empty()
    }

    pub fn items(&self) -> BTreeSet<&str> {
        self.ratings.keys().map(|(i, _)| i.as_str()).collect()
    }

    /// Ratings grouped per item, in annotator order.
    pub fn by_item(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for ((item, _), v) in &self.ratings {
            out.entry(item.as_str()).or_default().push(v.as_str());
        }
        out
    }

    /// Reads `item_id,annotator_id,task,value` rows belonging to `task`.
    pub fn from_csv(path: impl AsRef<Path>, task: &str, scale: Scale) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let mut set = AnnotationSet::new(scale);
        for (i, row) in reader.deserialize::<AnnotationRow>().enumerate() {
            let row = row?;
            if row.task == task {
                set.rate(row.item_id, row.annotator_id, row.value)
                    .map_err(|e| Error::Malformed {
                        line: i as u64 + 2,
                        message: e.to_string(),
                    })?;
            }
        }
        Ok(set)
    }

    fn ordered_values(&self) -> Vec<String> {
        let distinct: BTreeSet<&String> = self.ratings.values().collect();
        let mut values: Vec<String> = distinct.into_iter().cloned().collect();
        if self.scale == Scale::Ordinal {
            values.sort_by(|a, b| {
                let x: f64 = a.parse().unwrap_or(f64::NAN);
                let y: f64 = b.parse().unwrap_or(f64::NAN);
                x.total_cmp(&y)
            });
        }
        values
    }
}

/// Krippendorff's alpha from the coincidence matrix. Items with fewer than
/// two ratings are ignored. When every pairable rating carries the same
/// value (no expected disagreement) agreement is perfect and alpha is 1.
pub fn krippendorff_alpha(annotations: &AnnotationSet) -> Result<f64> {
    let values = annotations.ordered_values();
    let index: HashMap<&str, usize> = values
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_str(), i))
        .collect();
    let v = values.len();
    let mut o = vec![vec![0.0f64; v]; v];
    for ratings in annotations.by_item().values() {
        let m = ratings.len();
        if m < 2 {
            continue;
        }
        let w = 1.0 / (m as f64 - 1.0);
        for (a, x) in ratings.iter().enumerate() {
            for (b, y) in ratings.iter().enumerate() {
                if a != b {
                    o[index[x]][index[y]] += w;
                }
            }
        }
    }
    let margins: Vec<f64> = o.iter().map(|row| row.iter().sum()).collect();
    let n: f64 = margins.iter().sum();
    if n == 0.0 {
        return Err(Error::UndefinedAlpha("no item has two or more ratings"));
    }
    let delta = |c: usize, k: usize| -> f64 {
        match annotations.scale {
            Scale::Nominal => f64::from(u8::from(c != k)),
            Scale::Ordinal => {
                let (lo, hi) = (c.min(k), c.max(k));
                let between: f64 = margins[lo..=hi].iter().sum();
                (between - (margins[lo] + margins[hi]) / 2.0).powi(2)
            }
        }
    };
    let mut observed = 0.0;
    let mut expected = 0.0;
    for c in 0..v {
        for k in 0..v {
            let d = delta(c, k);
            observed += o[c][k] * d;
            expected += margins[c] * margins[k] * d;
        }
    }
    let d_o = observed / n;
    let d_e = expected / (n * (n - 1.0));
    if d_e == 0.0 {
        return Ok(if d_o == 0.0 { 1.0 } else { 0.0 });
    }
    Ok(1.0 - d_o / d_e)
}

/// Most frequent rating; `None` on a tie for first place.
pub fn majority<'a>(ratings: &[&'a str]) -> Option<&'a str> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for r in ratings {
        *counts.entry(r).or_insert(0) += 1;
    }
    let best = *counts.values().max()?;
    let mut winners = counts.into_iter().filter(|&(_, c)| c == best);
    match (winners.next(), winners.next()) {
        (Some((v, _)), None) => Some(v),
        _ => None,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ManualEvalStats {
    /// Mean of per-item majority ranks.
    pub mar: Option<f64>,
    /// Fraction of items whose majority judgment equals the true label.
    pub v_agree: Option<f64>,
    pub mar_items: usize,
    pub v_agree_items: usize,
    pub skipped: Vec<String>,
}

/// `judgments` are label-agreement annotations, `ranks` are quality ranks;
/// both are reduced to a per-item majority vote. Items without a clear
/// majority are skipped with a warning.
pub fn manual_eval_stats(
    judgments: &AnnotationSet,
    ranks: &AnnotationSet,
    true_labels: &HashMap<String, String>,
) -> ManualEvalStats {
    let mut stats = ManualEvalStats::default();

    let mut agree = 0usize;
    for (item, ratings) in judgments.by_item() {
        let Some(truth) = true_labels.get(item) else {
            warn!("no true label for item {item:?}");
            stats.skipped.push(item.to_string());
            continue;
        };
        match majority(&ratings) {
            Some(v) => {
                stats.v_agree_items += 1;
                agree += usize::from(v.eq_ignore_ascii_case(truth.trim()));
            }
            None => {
                warn!("no majority judgment for item {item:?}");
                stats.skipped.push(item.to_string());
            }
        }
    }
    if stats.v_agree_items > 0 {
        stats.v_agree = Some(agree as f64 / stats.v_agree_items as f64);
    }

    let mut rank_sum = 0.0;
    for (item, ratings) in ranks.by_item() {
        match majority(&ratings).and_then(|v| v.parse::<f64>().ok()) {
            Some(r) => {
                stats.mar_items += 1;
                rank_sum += r;
            }
            None => {
                warn!("no majority rank for item {item:?}");
                stats.skipped.push(item.to_string());
            }
        }
    }
    if stats.mar_items > 0 {
        stats.mar = Some(rank_sum / stats.mar_items as f64);
    }
    stats
}
