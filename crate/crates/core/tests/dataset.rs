use std::collections::HashSet;
use std::fs;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use climafact::dataset::{
    build_fev, feedback_split, load_climate_fever, load_feedback, load_records, stratified_split,
    write_split, DeltaReport, FevMode, LabelPolicy, SourceClaim, VeracityLabel, FEEDBACK_SPLIT,
};

const EVIDENCE_LABELS: [&str; 3] = ["SUPPORTS", "REFUTES", "NOT_ENOUGH_INFO"];
const CLAIM_LABELS: [&str; 4] = ["SUPPORTS", "REFUTES", "NOT_ENOUGH_INFO", "DISPUTED"];

fn synthetic_source(n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    for i in 0..n {
        let evidences: Vec<serde_json::Value> = (0..5)
            .map(|j| {
                serde_json::json!({
                    "evidence_id": format!("e{i}:{j}"),
                    "evidence": format!("evidence sentence {i} {j}"),
                    "evidence_label": EVIDENCE_LABELS[rng.gen_range(0..3)],
                    "article": "Some_article",
                    "entropy": 0.5,
                    "votes": ["SUPPORTS", null],
                })
            })
            .collect();
        let row = serde_json::json!({
            "claim_id": i,
            "claim": format!("claim number {i}"),
            "claim_label": CLAIM_LABELS[rng.gen_range(0..4)],
            "evidences": evidences,
        });
        out.push_str(&row.to_string());
        out.push('\n');
    }
    out
}

/// Counts (claims, pairs) straight from the raw rows with the published labels.
fn count_oracle(claims: &[SourceClaim], mode: FevMode) -> (usize, usize) {
    let mut n = 0;
    let mut pairs = 0;
    for c in claims {
        let keep = match mode {
            FevMode::Fev2 => c.claim_label == "SUPPORTS" || c.claim_label == "REFUTES",
            FevMode::Fev3 => c.claim_label != "DISPUTED",
        };
        let matching = c
            .evidences
            .iter()
            .filter(|e| e.evidence_label == c.claim_label)
            .count();
        if keep && matching > 0 {
            n += 1;
            pairs += matching;
        }
    }
    (n, pairs)
}

#[test]
fn published_policy_counts_match_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cf.jsonl");
    fs::write(&path, synthetic_source(300, 3)).unwrap();
    let claims = load_climate_fever(&path).unwrap();
    for mode in [FevMode::Fev2, FevMode::Fev3] {
        let (records, report) = build_fev(&claims, mode, LabelPolicy::Published).unwrap();
        assert_eq!((report.claims, report.pairs), count_oracle(&claims, mode));
        assert_eq!(records.len(), report.claims);
        for r in &records {
            assert!(!r.references.is_empty());
            assert!(mode.admits(r.overall_label));
        }
    }
}

#[test]
fn delta_report_flags_differences() {
    let report = |claims, pairs| climafact::dataset::BuildReport {
        claims,
        pairs,
        ..Default::default()
    };
    let exact = DeltaReport::new(FevMode::Fev2, &report(907, 1671));
    assert!(exact.is_exact() && exact.within(0.0));
    let close = DeltaReport::new(FevMode::Fev3, &report(1381, 3200));
    assert!(!close.is_exact());
    assert!(close.within(2.0));
    assert!((close.claim_delta_pct - 100.0 * 3.0 / 1378.0).abs() < 1e-12);
    let far = DeltaReport::new(FevMode::Fev2, &report(800, 1671));
    assert!(!far.within(2.0));
}

#[test]
fn fev_split_is_deterministic_and_uses_reported_proportions() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cf.jsonl");
    fs::write(&path, synthetic_source(400, 8)).unwrap();
    let claims = load_climate_fever(&path).unwrap();
    let (records, _) = build_fev(&claims, FevMode::Fev2, LabelPolicy::Majority).unwrap();
    let a = stratified_split(&records, FevMode::Fev2.default_ratios(), 42).unwrap();
    let b = stratified_split(&records, FevMode::Fev2.default_ratios(), 42).unwrap();
    assert_eq!(a, b);
    let total = records.len() as f64;
    let sizes = a.sizes();
    for (got, reported) in sizes.iter().zip(FevMode::Fev2.reported_split()) {
        assert!((*got as f64 - total * reported as f64 / 907.0).abs() <= 1.0);
    }
    let out = dir.path().join("split");
    write_split(&out, &a).unwrap();
    assert_eq!(load_records(out.join("test.jsonl")).unwrap(), a.test);
}

fn feedback_file(dir: &std::path::Path, n: usize) -> std::path::PathBuf {
    let path = dir.join("feedback.jsonl");
    let mut f = fs::File::create(&path).unwrap();
    let verdicts = [
        "Incorrect",
        "Misleading",
        "Accurate",
        "Inaccurate",
        "Correct but misleading",
    ];
    for i in 0..n {
        let row = serde_json::json!({
            "claim": format!("feedback claim {i}"),
            "explanation": format!("reviewers explain claim {i}"),
            "label": verdicts[i % verdicts.len()],
        });
        writeln!(f, "{row}").unwrap();
    }
    path
}

#[test]
fn feedback_loads_130_and_splits_90_15_25_for_five_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let records = load_feedback(feedback_file(dir.path(), 130)).unwrap();
    assert_eq!(records.len(), 130);
    assert!(records
        .iter()
        .all(|r| r.references.len() == 1 && !r.label_usable));
    let mut tests = HashSet::new();
    for seed in 0..5 {
        let split = feedback_split(&records, seed).unwrap();
        assert_eq!(split.sizes(), FEEDBACK_SPLIT);
        let ids: HashSet<&str> = split
            .parts()
            .iter()
            .flat_map(|(_, p)| p.iter().map(|r| r.claim_id.as_str()))
            .collect();
        assert_eq!(ids.len(), 130);
        let mut test_ids: Vec<&str> = split.test.iter().map(|r| r.claim_id.as_str()).collect();
        test_ids.sort();
        tests.insert(test_ids.join(","));
    }
    assert_eq!(tests.len(), 5, "each seed draws a different test set");
}

#[test]
fn feedback_verdicts_map_onto_labels() {
    let dir = tempfile::tempdir().unwrap();
    let records = load_feedback(feedback_file(dir.path(), 5)).unwrap();
    let labels: Vec<VeracityLabel> = records.iter().map(|r| r.overall_label).collect();
    assert_eq!(
        labels,
        vec![
            VeracityLabel::Refutes,
            VeracityLabel::Refutes,
            VeracityLabel::Supports,
            VeracityLabel::Refutes,
            VeracityLabel::Refutes
        ]
    );
}

/// Runs against the released CLIMATE-FEVER file when `CLIMATE_FEVER_JSONL`
/// points at it.
#[test]
#[ignore = "needs the CLIMATE-FEVER JSONL file in CLIMATE_FEVER_JSONL"]
fn published_counts_on_released_file() {
    let path = std::env::var("CLIMATE_FEVER_JSONL").expect("CLIMATE_FEVER_JSONL is not set");
    let claims = load_climate_fever(path).unwrap();
    for mode in [FevMode::Fev2, FevMode::Fev3] {
        let (_, report) = build_fev(&claims, mode, LabelPolicy::Published).unwrap();
        let delta = DeltaReport::new(mode, &report);
        println!("{delta:?}");
        assert!(delta.within(2.0), "{delta:?}");
    }
}
