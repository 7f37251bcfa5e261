//! Build FEV2/FEV3 records from CLIMATE-FEVER rows and split them.

use std::fs;

use climafact::dataset::{
    build_fev, load_climate_fever, stratified_split, DeltaReport, FevMode, LabelPolicy,
};

const ROWS: &str = r#"{"claim_id":0,"claim":"Sea ice is recovering.","claim_label":"REFUTES","evidences":[{"evidence":"Arctic sea ice keeps shrinking.","evidence_label":"REFUTES"},{"evidence":"Ice is frozen water.","evidence_label":"NOT_ENOUGH_INFO"}]}
{"claim_id":1,"claim":"CO2 warms the planet.","claim_label":"SUPPORTS","evidences":[{"evidence":"CO2 absorbs infrared radiation.","evidence_label":"SUPPORTS"}]}
{"claim_id":2,"claim":"Volcanoes emit more CO2 than humans.","claim_label":"DISPUTED","evidences":[{"evidence":"Humans emit about 100 times more.","evidence_label":"REFUTES"}]}
{"claim_id":3,"claim":"Clouds have a net effect.","claim_label":"NOT_ENOUGH_INFO","evidences":[{"evidence":"Cloud feedback is uncertain.","evidence_label":"NOT_ENOUGH_INFO"}]}
"#;

fn main() -> climafact::Result<()> {
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("climate-fever.jsonl");
    fs::write(&path, ROWS)?;
    let claims = load_climate_fever(&path)?;
    for mode in [FevMode::Fev2, FevMode::Fev3] {
        for policy in [LabelPolicy::Majority, LabelPolicy::Published] {
            let (records, report) = build_fev(&claims, mode, policy)?;
            let delta = DeltaReport::new(mode, &report);
            println!(
                "{mode:?} {policy:?}: {} claims, {} pairs (published totals {}/{})",
                report.claims, report.pairs, delta.expected_claims, delta.expected_pairs
            );
            let split = stratified_split(&records, mode.default_ratios(), 7)?;
            println!("  train/validation/test = {:?}", split.sizes());
        }
    }
    Ok(())
}
