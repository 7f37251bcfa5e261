//! Paired claim/explanation datasets: the two- and three-way derivations of
//! CLIMATE-FEVER and the Climate Feedback claim/explanation pairs.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VeracityLabel {
    #[serde(rename = "SUPPORTS")]
    Supports,
    #[serde(rename = "REFUTES")]
    Refutes,
    #[serde(rename = "NOT_ENOUGH_INFO")]
    NotEnoughInfo,
}

impl VeracityLabel {
    pub const ALL: [VeracityLabel; 3] = [
        VeracityLabel::Supports,
        VeracityLabel::Refutes,
        VeracityLabel::NotEnoughInfo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VeracityLabel::Supports => "SUPPORTS",
            VeracityLabel::Refutes => "REFUTES",
            VeracityLabel::NotEnoughInfo => "NOT_ENOUGH_INFO",
        }
    }
}

impl fmt::Display for VeracityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VeracityLabel {
    type Err = Error;

    /// Case-insensitive match on the canonical names.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        VeracityLabel::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown veracity label {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceSentence {
    pub text: String,
    pub label: VeracityLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimRecord {
    pub claim_id: String,
    pub text: String,
    #[serde(default)]
    pub evidence: Vec<EvidenceSentence>,
    pub overall_label: VeracityLabel,
    pub references: Vec<String>,
    /// False when the label should not be used for veracity scoring
    /// (Climate Feedback labels are heavily imbalanced).
    #[serde(default = "yes")]
    pub label_usable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_label: Option<String>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplit {
    pub train: Vec<ClaimRecord>,
    pub validation: Vec<ClaimRecord>,
    pub test: Vec<ClaimRecord>,
    pub seed: u64,
}

impl DatasetSplit {
    pub fn sizes(&self) -> [usize; 3] {
        [self.train.len(), self.validation.len(), self.test.len()]
    }

    pub fn parts(&self) -> [(&'static str, &[ClaimRecord]); 3] {
        [
            ("train", &self.train),
            ("validation", &self.validation),
            ("test", &self.test),
        ]
    }
}

/// Plurality vote; any tie for first place resolves to NOT_ENOUGH_INFO.
pub fn aggregate_label(labels: &[VeracityLabel]) -> Result<VeracityLabel> {
    if labels.is_empty() {
        return Err(Error::invalid("cannot aggregate an empty label sequence"));
    }
    let mut counts = [0usize; 3];
    for &l in labels {
        counts[l as usize] += 1;
    }
    let best = *counts.iter().max().unwrap_or(&0);
    let mut winners = VeracityLabel::ALL
        .into_iter()
        .filter(|&l| counts[l as usize] == best);
    match (winners.next(), winners.next()) {
        (Some(l), None) => Ok(l),
        _ => Ok(VeracityLabel::NotEnoughInfo),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FevMode {
    /// SUPPORTS vs REFUTES only.
    Fev2,
    Fev3,
}

impl FevMode {
    pub fn admits(self, label: VeracityLabel) -> bool {
        match self {
            FevMode::Fev2 => label != VeracityLabel::NotEnoughInfo,
            FevMode::Fev3 => true,
        }
    }

    /// Published (claims, pairs) after construction.
    pub fn reported_totals(self) -> (usize, usize) {
        match self {
            FevMode::Fev2 => (907, 1671),
            FevMode::Fev3 => (1378, 3196),
        }
    }

    /// Published train/validation/test sizes.
    pub fn reported_split(self) -> [usize; 3] {
        match self {
            FevMode::Fev2 => [680, 50, 177],
            FevMode::Fev3 => [963, 83, 332],
        }
    }

    /// Split ratios implied by [`FevMode::reported_split`].
    pub fn default_ratios(self) -> [f64; 3] {
        let sizes = self.reported_split();
        let total: usize = sizes.iter().sum();
        sizes.map(|s| s as f64 / total as f64)
    }
}

impl FromStr for FevMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fev2" => Ok(FevMode::Fev2),
            "fev3" => Ok(FevMode::Fev3),
            other => Err(Error::invalid(format!("unknown dataset mode {other:?}"))),
        }
    }
}

/// Where a claim's overall label comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LabelPolicy {
    /// [`aggregate_label`] over the evidence labels.
    #[default]
    Majority,
    /// The label shipped with the source claim.
    Published,
}

/// One claim as distributed in the CLIMATE-FEVER JSONL file.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct SourceClaim {
    #[serde(deserialize_with = "string_or_number")]
    pub claim_id: String,
    pub claim: String,
    pub claim_label: String,
    pub evidences: Vec<SourceEvidence>,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct SourceEvidence {
    pub evidence: String,
    pub evidence_label: String,
}

fn string_or_number<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<String, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Str(String),
        Num(i64),
    }
    Ok(match Raw::deserialize(d)? {
        Raw::Str(s) => s,
        Raw::Num(n) => n.to_string(),
    })
}

/// Labels in the source file use SUPPORTS/REFUTES/NOT_ENOUGH_INFO and, for
/// claims only, DISPUTED.
const DISPUTED: &str = "DISPUTED";

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Malformed {
            line: i as u64 + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn load_climate_fever(path: impl AsRef<Path>) -> Result<Vec<SourceClaim>> {
    read_jsonl(path.as_ref())
}

/// Counts produced while deriving an FEV dataset.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BuildReport {
    pub input_claims: usize,
    pub disputed_excluded: usize,
    pub label_excluded: usize,
    pub no_reference_excluded: usize,
    pub claims: usize,
    pub pairs: usize,
    pub label_counts: BTreeMap<String, usize>,
}

/// Derives FEV2 or FEV3 records. DISPUTED source claims are always
/// excluded; evidence whose label differs from the claim label is dropped
/// from the references, and claims left without references are discarded.
pub fn build_fev(
    claims: &[SourceClaim],
    mode: FevMode,
    policy: LabelPolicy,
) -> Result<(Vec<ClaimRecord>, BuildReport)> {
    let mut report = BuildReport {
        input_claims: claims.len(),
        ..BuildReport::default()
    };
    let mut out = Vec::new();
    for c in claims {
        if c.claim_label.trim().eq_ignore_ascii_case(DISPUTED) {
            report.disputed_excluded += 1;
            continue;
        }
        let evidence = c
            .evidences
            .iter()
            .filter(|e| !e.evidence.trim().is_empty())
            .map(|e| {
                Ok(EvidenceSentence {
                    text: e.evidence.clone(),
                    label: e.evidence_label.parse()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let label = match policy {
            LabelPolicy::Majority => {
                if evidence.is_empty() {
                    report.no_reference_excluded += 1;
                    continue;
                }
                let labels: Vec<VeracityLabel> = evidence.iter().map(|e| e.label).collect();
                aggregate_label(&labels)?
            }
            LabelPolicy::Published => c.claim_label.parse()?,
        };
        if !mode.admits(label) {
            report.label_excluded += 1;
            continue;
        }
        let references: Vec<String> = evidence
            .iter()
            .filter(|e| e.label == label)
            .map(|e| e.text.clone())
            .collect();
        if references.is_empty() {
            report.no_reference_excluded += 1;
            continue;
        }
        report.pairs += references.len();
        *report.label_counts.entry(label.to_string()).or_default() += 1;
        out.push(ClaimRecord {
            claim_id: c.claim_id.clone(),
            text: c.claim.clone(),
            evidence,
            overall_label: label,
            references,
            label_usable: true,
            raw_label: Some(c.claim_label.clone()),
        });
    }
    report.claims = out.len();
    Ok((out, report))
}

/// Difference between built totals and the published ones.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaReport {
    pub mode: String,
    pub expected_claims: usize,
    pub actual_claims: usize,
    pub expected_pairs: usize,
    pub actual_pairs: usize,
    pub claim_delta_pct: f64,
    pub pair_delta_pct: f64,
}

impl DeltaReport {
    pub fn new(mode: FevMode, report: &BuildReport) -> Self {
        let (expected_claims, expected_pairs) = mode.reported_totals();
        let pct = |actual: usize, expected: usize| {
            100.0 * (actual as f64 - expected as f64) / expected as f64
        };
        DeltaReport {
            mode: format!("{mode:?}"),
            expected_claims,
            actual_claims: report.claims,
            expected_pairs,
            actual_pairs: report.pairs,
            claim_delta_pct: pct(report.claims, expected_claims),
            pair_delta_pct: pct(report.pairs, expected_pairs),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.actual_claims == self.expected_claims && self.actual_pairs == self.expected_pairs
    }

    pub fn within(&self, tolerance_pct: f64) -> bool {
        self.claim_delta_pct.abs() <= tolerance_pct && self.pair_delta_pct.abs() <= tolerance_pct
    }
}

/// Splits `n` into integer parts proportional to `ratios` by largest remainder.
fn largest_remainder(n: usize, ratios: &[f64; 3]) -> [usize; 3] {
    let mut parts = [0usize; 3];
    let mut fracs = Vec::with_capacity(3);
    for (i, r) in ratios.iter().enumerate() {
        let exact = n as f64 * r;
        parts[i] = exact.floor() as usize;
        fracs.push((exact - exact.floor(), i));
    }
    let mut left = n - parts.iter().sum::<usize>();
    fracs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for (_, i) in fracs.into_iter().cycle() {
        if left == 0 {
            break;
        }
        parts[i] += 1;
        left -= 1;
    }
    parts
}

/// Finds an alternating path from class `c` to a part with spare capacity.
fn augment(
    c: usize,
    edges: &[(usize, usize)],
    bumped: &mut [[bool; 3]],
    deficit: &mut [usize],
    seen: &mut [bool],
) -> bool {
    seen[c] = true;
    for &(from, i) in edges {
        if from != c || bumped[c][i] {
            continue;
        }
        if deficit[i] > 0 {
            deficit[i] -= 1;
            bumped[c][i] = true;
            return true;
        }
    }
    for &(from, i) in edges {
        if from != c || bumped[c][i] {
            continue;
        }
        let holders: Vec<usize> = (0..bumped.len())
            .filter(|&d| bumped[d][i] && !seen[d])
            .collect();
        for d in holders {
            // d moves its round-up to another part, handing part i to c.
            if augment(d, edges, bumped, deficit, seen) {
                bumped[d][i] = false;
                bumped[c][i] = true;
                return true;
            }
        }
    }
    false
}

/// Per-class part sizes whose column sums match the largest-remainder totals
/// and whose entries stay within one record of `n_c * ratio`.
fn allocate(class_sizes: &[usize], ratios: &[f64; 3]) -> Vec<[usize; 3]> {
    let total: usize = class_sizes.iter().sum();
    let targets = largest_remainder(total, ratios);
    let mut alloc: Vec<[usize; 3]> = Vec::with_capacity(class_sizes.len());
    let mut candidates = Vec::new();
    let mut leftover = Vec::with_capacity(class_sizes.len());
    for (c, &n) in class_sizes.iter().enumerate() {
        let mut row = [0usize; 3];
        for i in 0..3 {
            let exact = n as f64 * ratios[i];
            row[i] = exact.floor() as usize;
            candidates.push((exact - exact.floor(), c, i));
        }
        leftover.push(n - row.iter().sum::<usize>());
        alloc.push(row);
    }
    let mut deficit: Vec<usize> = (0..3)
        .map(|i| targets[i] - alloc.iter().map(|r| r[i]).sum::<usize>())
        .collect();
    // Each (class, part) cell may be rounded up at most once; placing the
    // leftovers is a bipartite matching solved by augmenting paths, visiting
    // cells in order of decreasing fractional part.
    candidates.retain(|&(frac, _, _)| frac > 0.0);
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let edges: Vec<(usize, usize)> = candidates.iter().map(|&(_, c, i)| (c, i)).collect();
    let mut bumped = vec![[false; 3]; class_sizes.len()];
    for (c, left) in leftover.iter_mut().enumerate() {
        while *left > 0 {
            let mut seen = vec![false; class_sizes.len()];
            if !augment(c, &edges, &mut bumped, &mut deficit, &mut seen) {
                unreachable!("a rounding within one record always exists");
            }
            *left -= 1;
        }
    }
    for (row, flags) in alloc.iter_mut().zip(&bumped) {
        for i in 0..3 {
            row[i] += usize::from(flags[i]);
        }
    }
    alloc
}

fn check_ratios(ratios: &[f64; 3]) -> Result<()> {
    let sum: f64 = ratios.iter().sum();
    if (sum - 1.0).abs() > 1e-9 || ratios.iter().any(|r| !(0.0..=1.0).contains(r)) {
        return Err(Error::invalid(format!(
            "split ratios {ratios:?} must be in [0, 1] and sum to 1"
        )));
    }
    Ok(())
}

/// Label-stratified train/validation/test split, deterministic in `seed`.
pub fn stratified_split(
    records: &[ClaimRecord],
    ratios: [f64; 3],
    seed: u64,
) -> Result<DatasetSplit> {
    check_ratios(&ratios)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut classes: BTreeMap<VeracityLabel, Vec<&ClaimRecord>> = BTreeMap::new();
    for r in records {
        classes.entry(r.overall_label).or_default().push(r);
    }
    for (label, members) in &classes {
        if members.len() < 3 {
            warn!(
                "label {label} has {} records, fewer than the 3 split parts",
                members.len()
            );
        }
    }
    let sizes: Vec<usize> = classes.values().map(Vec::len).collect();
    let alloc = allocate(&sizes, &ratios);
    let mut parts: [Vec<ClaimRecord>; 3] = Default::default();
    for (members, row) in classes.into_values().zip(alloc) {
        let mut members = members;
        members.shuffle(&mut rng);
        let mut it = members.into_iter();
        for (part, &take) in parts.iter_mut().zip(row.iter()) {
            part.extend(it.by_ref().take(take).cloned());
        }
    }
    let [train, validation, test] = parts;
    Ok(DatasetSplit {
        train,
        validation,
        test,
        seed,
    })
}

/// Unstratified split with exact part sizes.
pub fn random_split(records: &[ClaimRecord], sizes: [usize; 3], seed: u64) -> Result<DatasetSplit> {
    if sizes.iter().sum::<usize>() != records.len() {
        return Err(Error::invalid(format!(
            "split sizes {sizes:?} do not add up to {} records",
            records.len()
        )));
    }
    let mut shuffled: Vec<ClaimRecord> = records.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = shuffled.split_off(sizes[0] + sizes[1]);
    let validation = shuffled.split_off(sizes[0]);
    Ok(DatasetSplit {
        train: shuffled,
        validation,
        test,
        seed,
    })
}

/// 90/15/25 for the full 130 pairs, scaled proportionally otherwise.
pub const FEEDBACK_SPLIT: [usize; 3] = [90, 15, 25];

pub fn feedback_split(records: &[ClaimRecord], seed: u64) -> Result<DatasetSplit> {
    let total: usize = FEEDBACK_SPLIT.iter().sum();
    let ratios = FEEDBACK_SPLIT.map(|s| s as f64 / total as f64);
    random_split(records, largest_remainder(records.len(), &ratios), seed)
}

#[derive(Deserialize)]
struct FeedbackRow {
    #[serde(default, deserialize_with = "opt_string_or_number")]
    claim_id: Option<String>,
    claim: String,
    explanation: String,
    label: String,
}

fn opt_string_or_number<'de, D: Deserializer<'de>>(
    d: D,
) -> std::result::Result<Option<String>, D::Error> {
    string_or_number(d).map(Some)
}

/// Maps a Climate Feedback verdict onto the three-way label set.
fn feedback_label(raw: &str) -> VeracityLabel {
    if let Ok(l) = raw.parse() {
        return l;
    }
    let r = raw.trim().to_ascii_lowercase();
    let refuting = [
        "incorrect",
        "inaccurate",
        "misleading",
        "false",
        "flawed",
        "unsupported",
        "lacks context",
    ];
    if refuting.iter().any(|w| r.contains(w)) {
        VeracityLabel::Refutes
    } else if ["correct", "accurate", "true"]
        .iter()
        .any(|w| r.contains(w))
    {
        VeracityLabel::Supports
    } else {
        VeracityLabel::NotEnoughInfo
    }
}

/// Loads Climate Feedback pairs (`claim`, `explanation`, `label`, optional
/// `claim_id`). Each record has exactly one reference, and its label is
/// marked unusable for veracity scoring.
pub fn load_feedback(path: impl AsRef<Path>) -> Result<Vec<ClaimRecord>> {
    let rows: Vec<FeedbackRow> = read_jsonl(path.as_ref())?;
    Ok(rows
        .into_iter()
        .enumerate()
        .map(|(i, row)| ClaimRecord {
            claim_id: row.claim_id.unwrap_or_else(|| format!("feedback-{i}")),
            text: row.claim,
            evidence: Vec::new(),
            overall_label: feedback_label(&row.label),
            references: vec![row.explanation],
            label_usable: false,
            raw_label: Some(row.label),
        })
        .collect())
}

pub fn load_records(path: impl AsRef<Path>) -> Result<Vec<ClaimRecord>> {
    read_jsonl(path.as_ref())
}

pub fn write_records(path: impl AsRef<Path>, records: &[ClaimRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_split(dir: impl AsRef<Path>, split: &DatasetSplit) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    for (name, records) in split.parts() {
        write_records(dir.join(format!("{name}.jsonl")), records)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;
    use VeracityLabel::*;

    fn record(id: usize, label: VeracityLabel) -> ClaimRecord {
        ClaimRecord {
            claim_id: id.to_string(),
            text: format!("claim {id}"),
            evidence: Vec::new(),
            overall_label: label,
            references: vec![format!("ref {id}")],
            label_usable: true,
            raw_label: None,
        }
    }

    fn source(id: &str, claim_label: &str, labels: &[VeracityLabel]) -> SourceClaim {
        SourceClaim {
            claim_id: id.into(),
            claim: format!("claim {id}"),
            claim_label: claim_label.into(),
            evidences: labels
                .iter()
                .enumerate()
                .map(|(i, l)| SourceEvidence {
                    evidence: format!("evidence {id}.{i}"),
                    evidence_label: l.to_string(),
                })
                .collect(),
        }
    }

    #[test]
    fn aggregation_examples() {
        assert_eq!(
            aggregate_label(&[Supports, Supports, Supports, Refutes, NotEnoughInfo]).unwrap(),
            Supports
        );
        assert_eq!(
            aggregate_label(&[Supports, Supports, Refutes, Refutes, NotEnoughInfo]).unwrap(),
            NotEnoughInfo
        );
        assert_eq!(aggregate_label(&[Refutes]).unwrap(), Refutes);
        assert!(aggregate_label(&[]).is_err());
    }

    #[test]
    fn label_parsing() {
        assert_eq!("supports".parse::<VeracityLabel>().unwrap(), Supports);
        assert_eq!(
            " NOT_ENOUGH_INFO ".parse::<VeracityLabel>().unwrap(),
            NotEnoughInfo
        );
        assert!("DISPUTED".parse::<VeracityLabel>().is_err());
    }

    #[test]
    fn fev2_discards_tied_claims() {
        let c = source(
            "1",
            "SUPPORTS",
            &[Supports, Supports, Refutes, NotEnoughInfo, NotEnoughInfo],
        );
        let (fev2, report) = build_fev(
            std::slice::from_ref(&c),
            FevMode::Fev2,
            LabelPolicy::Majority,
        )
        .unwrap();
        assert!(fev2.is_empty());
        assert_eq!(report.label_excluded, 1);
        let (fev3, _) = build_fev(&[c], FevMode::Fev3, LabelPolicy::Majority).unwrap();
        assert_eq!(fev3[0].overall_label, NotEnoughInfo);
        assert_eq!(fev3[0].references.len(), 2);
    }

    #[test]
    fn filtering_and_disputed_exclusion() {
        let claims = [
            source(
                "a",
                "SUPPORTS",
                &[Supports, Supports, Supports, Refutes, NotEnoughInfo],
            ),
            source(
                "b",
                "DISPUTED",
                &[Supports, Refutes, Refutes, Refutes, Supports],
            ),
        ];
        let (recs, report) = build_fev(&claims, FevMode::Fev3, LabelPolicy::Majority).unwrap();
        assert_eq!(report.disputed_excluded, 1);
        assert_eq!(recs.len(), 1);
        assert_eq!(
            recs[0].references,
            vec!["evidence a.0", "evidence a.1", "evidence a.2"]
        );
        assert_eq!(report.pairs, 3);
    }

    #[test]
    fn published_policy_can_leave_no_references() {
        let c = source("x", "REFUTES", &[Supports, NotEnoughInfo]);
        let (recs, report) = build_fev(&[c], FevMode::Fev2, LabelPolicy::Published).unwrap();
        assert!(recs.is_empty());
        assert_eq!(report.no_reference_excluded, 1);
    }

    #[test]
    fn stratification_arithmetic() {
        let recs: Vec<_> = (0..100)
            .map(|i| record(i, if i < 60 { Supports } else { Refutes }))
            .collect();
        let split = stratified_split(&recs, [0.7, 0.1, 0.2], 7).unwrap();
        let count = |part: &[ClaimRecord], l| part.iter().filter(|r| r.overall_label == l).count();
        assert_eq!(count(&split.train, Supports), 42);
        assert_eq!(count(&split.train, Refutes), 28);
        assert_eq!(split.sizes(), [70, 10, 20]);
        assert_eq!(split, stratified_split(&recs, [0.7, 0.1, 0.2], 7).unwrap());
        assert_ne!(split, stratified_split(&recs, [0.7, 0.1, 0.2], 8).unwrap());
    }

    #[test]
    fn default_ratios_reproduce_reported_sizes() {
        for mode in [FevMode::Fev2, FevMode::Fev3] {
            let total: usize = mode.reported_split().iter().sum();
            assert_eq!(
                largest_remainder(total, &mode.default_ratios()),
                mode.reported_split()
            );
        }
    }

    #[test]
    fn bad_ratios_rejected() {
        assert!(stratified_split(&[], [0.5, 0.5, 0.1], 0).is_err());
    }

    #[test]
    fn feedback_sizes() {
        let recs: Vec<_> = (0..130).map(|i| record(i, Refutes)).collect();
        assert_eq!(feedback_split(&recs, 3).unwrap().sizes(), [90, 15, 25]);
    }

    #[test]
    fn feedback_verdicts() {
        assert_eq!(feedback_label("Incorrect"), Refutes);
        assert_eq!(feedback_label("partially correct"), Supports);
        assert_eq!(feedback_label("Misleading"), Refutes);
        assert_eq!(feedback_label("unclear"), NotEnoughInfo);
    }

    fn label_strategy() -> impl Strategy<Value = VeracityLabel> {
        prop_oneof![Just(Supports), Just(Refutes), Just(NotEnoughInfo)]
    }

    proptest! {
        #[test]
        fn split_is_exhaustive_disjoint_and_balanced(
            labels in proptest::collection::vec(label_strategy(), 0..200),
            seed in any::<u64>(),
            a in 1u32..20, b in 0u32..20, c in 1u32..20,
        ) {
            let total = f64::from(a + b + c);
            let ratios = [f64::from(a) / total, f64::from(b) / total, 1.0 - f64::from(a + b) / total];
            let recs: Vec<_> = labels.iter().enumerate().map(|(i, &l)| record(i, l)).collect();
            let split = stratified_split(&recs, ratios, seed).unwrap();
            let mut seen = HashSet::new();
            for (_, part) in split.parts() {
                for r in part {
                    prop_assert!(seen.insert(r.claim_id.clone()));
                }
            }
            prop_assert_eq!(seen.len(), recs.len());
            for l in VeracityLabel::ALL {
                let n = recs.iter().filter(|r| r.overall_label == l).count() as f64;
                for (i, (_, part)) in split.parts().iter().enumerate() {
                    let got = part.iter().filter(|r| r.overall_label == l).count() as f64;
                    prop_assert!((got - n * ratios[i]).abs() <= 1.0 + 1e-9,
                        "label {} part {} got {} expected {}", l, i, got, n * ratios[i]);
                }
            }
        }

        #[test]
        fn fev2_claims_are_a_subset_of_fev3(
            evidence in proptest::collection::vec(proptest::collection::vec(label_strategy(), 1..6), 1..40),
        ) {
            let claims: Vec<_> = evidence.iter().enumerate()
                .map(|(i, ls)| source(&i.to_string(), "SUPPORTS", ls)).collect();
            let (fev2, _) = build_fev(&claims, FevMode::Fev2, LabelPolicy::Majority).unwrap();
            let (fev3, _) = build_fev(&claims, FevMode::Fev3, LabelPolicy::Majority).unwrap();
            for r in &fev2 {
                let twin = fev3.iter().find(|t| t.claim_id == r.claim_id);
                prop_assert!(twin.is_some_and(|t| t.overall_label == r.overall_label));
            }
            for r in fev2.iter().chain(&fev3) {
                for reference in &r.references {
                    let src = r.evidence.iter().find(|e| &e.text == reference).unwrap();
                    prop_assert_eq!(src.label, r.overall_label);
                }
            }
        }
    }
}
