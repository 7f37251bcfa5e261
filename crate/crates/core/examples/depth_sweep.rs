//! Retrieval-depth sweep with the top-1 and echo backends, writing the
//! report bundle to a temporary directory.

use climafact::corpus::{Document, PassageStore};
use climafact::dataset::{write_records, ClaimRecord, VeracityLabel};
use climafact::harness::{
    cells_csv, run_experiment, RetrieverConfig, DEFAULT_SWEEP, SCHEMA_VERSION,
};
use climafact::{ExperimentConfig, GeneratorBackend, InvertedIndex};

const FACTS: [&str; 6] = [
    "Arctic sea ice extent has fallen by about 13 percent per decade since 1979.",
    "Atmospheric carbon dioxide concentrations are the highest in 800000 years.",
    "Global average temperature has risen about 1.1 degrees since preindustrial times.",
    "Ocean heat content reached a record high in 2023.",
    "Solar irradiance shows no upward trend since the 1950s.",
    "Glaciers are retreating on every continent.",
];

fn main() -> climafact::Result<()> {
    let dir = tempfile::tempdir()?;
    let (store, _) = PassageStore::from_documents(
        "facts",
        FACTS.iter().enumerate().map(|(i, f)| Document {
            doc_id: i.to_string(),
            title: String::new(),
            body: f.to_string(),
        }),
    )?;
    store.save(dir.path().join("store.cfps"))?;
    InvertedIndex::build(&store)?.save(dir.path().join("bm25.idx"))?;
    let claims = [
        (
            "The Arctic sea ice is growing.",
            VeracityLabel::Refutes,
            FACTS[0],
        ),
        (
            "The sun drives recent warming.",
            VeracityLabel::Refutes,
            FACTS[4],
        ),
        (
            "Oceans are storing more heat.",
            VeracityLabel::Supports,
            FACTS[3],
        ),
    ];
    let records: Vec<ClaimRecord> = claims
        .iter()
        .enumerate()
        .map(|(i, (text, label, reference))| ClaimRecord {
            claim_id: format!("c{i}"),
            text: text.to_string(),
            evidence: Vec::new(),
            overall_label: *label,
            references: vec![reference.to_string()],
            label_usable: true,
            raw_label: None,
        })
        .collect();
    write_records(dir.path().join("test.jsonl"), &records)?;

    for backend in [GeneratorBackend::Top1, GeneratorBackend::Echo] {
        let config = ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            name: backend.name().to_string(),
            knowledge_source: dir.path().join("store.cfps"),
            retriever: RetrieverConfig::Bm25 {
                index: dir.path().join("bm25.idx"),
                params: Default::default(),
                entity_augment: false,
                linker: None,
            },
            k: 1,
            k_sweep: DEFAULT_SWEEP.to_vec(),
            train_dataset: None,
            test_dataset: dir.path().join("test.jsonl"),
            backend,
            seeds: vec![0],
            metrics: vec![
                climafact::metrics::Metric::Rouge1,
                climafact::metrics::Metric::RougeL,
            ],
            bscore: Default::default(),
            max_tokens: 200,
            compare_baselines: false,
        };
        let out = dir.path().join(&config.name);
        let cells = run_experiment(&config, &out)?;
        print!("{}", cells_csv(&cells)?);
    }
    Ok(())
}
