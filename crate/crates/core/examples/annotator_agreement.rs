//! Krippendorff's alpha and the manual-evaluation summaries from a CSV.

use std::collections::HashMap;
use std::fs;

use climafact::metrics::{krippendorff_alpha, manual_eval_stats, AnnotationSet, Scale};

const CSV: &str = "item_id,annotator_id,task,value
c1,ann1,T1,SUPPORTS
c1,ann2,T1,SUPPORTS
c1,ann3,T1,REFUTES
c2,ann1,T1,REFUTES
c2,ann2,T1,REFUTES
c2,ann3,T1,REFUTES
c3,ann1,T1,SUPPORTS
c3,ann2,T1,NOT_ENOUGH_INFO
c3,ann3,T1,SUPPORTS
c1,ann1,T2,1
c1,ann2,T2,2
c1,ann3,T2,1
c2,ann1,T2,3
c2,ann2,T2,2
c2,ann3,T2,3
c3,ann1,T2,1
c3,ann2,T2,1
c3,ann3,T2,2
";

fn main() -> climafact::Result<()> {
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("annotations.csv");
    fs::write(&path, CSV)?;
    let judgments = AnnotationSet::from_csv(&path, "T1", Scale::Nominal)?;
    let ranks = AnnotationSet::from_csv(&path, "T2", Scale::Ordinal)?;
    println!("alpha (labels)  = {:.4}", krippendorff_alpha(&judgments)?);
    println!("alpha (ranks)   = {:.4}", krippendorff_alpha(&ranks)?);

    let truth: HashMap<String, String> = [("c1", "SUPPORTS"), ("c2", "REFUTES"), ("c3", "REFUTES")]
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .into();
    let stats = manual_eval_stats(&judgments, &ranks, &truth);
    println!(
        "MAR={:?} V-AGREE={:?} skipped={:?}",
        stats.mar, stats.v_agree, stats.skipped
    );
    Ok(())
}
