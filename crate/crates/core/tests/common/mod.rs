#![allow(dead_code)]

pub mod oracles;

use std::collections::HashMap;
use std::sync::Arc;
use std::thread::JoinHandle;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use climafact::corpus::{Document, PassageStore};
use climafact::dataset::{ClaimRecord, EvidenceSentence, VeracityLabel};

pub const VOCAB: [&str; 40] = [
    "ocean",
    "heat",
    "carbon",
    "dioxide",
    "ice",
    "sheet",
    "melt",
    "sea",
    "level",
    "rise",
    "temperature",
    "record",
    "arctic",
    "antarctic",
    "glacier",
    "emission",
    "fossil",
    "fuel",
    "solar",
    "cycle",
    "warming",
    "trend",
    "model",
    "forecast",
    "drought",
    "flood",
    "storm",
    "coral",
    "reef",
    "acid",
    "methane",
    "permafrost",
    "forest",
    "fire",
    "greenland",
    "snow",
    "cover",
    "rain",
    "wind",
    "energy",
];

/// Zipf-ish word draw so document frequencies vary.
pub fn word(rng: &mut ChaCha8Rng) -> &'static str {
    let r: f64 = rng.gen();
    VOCAB[((r * r) * VOCAB.len() as f64) as usize]
}

pub fn sentence(rng: &mut ChaCha8Rng, len: usize) -> String {
    (0..len).map(|_| word(rng)).collect::<Vec<_>>().join(" ")
}

/// `n` single-passage documents of 5..=100 words.
pub fn synthetic_store(n: usize, seed: u64) -> PassageStore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let docs: Vec<Document> = (0..n)
        .map(|i| {
            let len = rng.gen_range(5..=100);
            Document {
                doc_id: format!("d{i}"),
                title: format!("Title {i}"),
                body: sentence(&mut rng, len),
            }
        })
        .collect();
    PassageStore::from_documents("synthetic", docs).unwrap().0
}

/// Ten claims whose references overlap the synthetic vocabulary.
pub fn claim_fixture() -> Vec<ClaimRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    (0..10)
        .map(|i| {
            let label = [VeracityLabel::Supports, VeracityLabel::Refutes][i % 2];
            let refs = vec![sentence(&mut rng, 12), sentence(&mut rng, 8)];
            ClaimRecord {
                claim_id: format!("c{i}"),
                text: sentence(&mut rng, 6),
                evidence: refs
                    .iter()
                    .map(|t| EvidenceSentence {
                        text: t.clone(),
                        label,
                    })
                    .collect(),
                overall_label: label,
                references: refs,
                label_usable: true,
                raw_label: None,
            }
        })
        .collect()
}

pub type Handler = dyn Fn(&str, &str, &serde_json::Value) -> (u16, String) + Send + Sync;

/// A canned HTTP server on an ephemeral port. The handler receives
/// (method, url, json body) and returns (status, body).
pub struct StubServer {
    pub url: String,
    server: Arc<tiny_http::Server>,
    worker: Option<JoinHandle<()>>,
}

impl StubServer {
    pub fn start(
        handler: impl Fn(&str, &str, &serde_json::Value) -> (u16, String) + Send + Sync + 'static,
    ) -> Self {
        let server = Arc::new(tiny_http::Server::http("127.0.0.1:0").unwrap());
        let port = server.server_addr().to_ip().unwrap().port();
        let s = Arc::clone(&server);
        let handler: Arc<Handler> = Arc::new(handler);
        let worker = std::thread::spawn(move || {
            for mut request in s.incoming_requests() {
                let mut body = String::new();
                let _ = request.as_reader().read_to_string(&mut body);
                let json = serde_json::from_str(&body).unwrap_or(serde_json::Value::Null);
                let method = request.method().as_str().to_string();
                let url = request.url().to_string();
                let handler = Arc::clone(&handler);
                std::thread::spawn(move || {
                    let (status, text) = handler(&method, &url, &json);
                    let header =
                        tiny_http::Header::from_bytes("Content-Type", "application/json").unwrap();
                    let _ = request.respond(
                        tiny_http::Response::from_string(text)
                            .with_status_code(status)
                            .with_header(header),
                    );
                });
            }
        });
        StubServer {
            url: format!("http://127.0.0.1:{port}"),
            server,
            worker: Some(worker),
        }
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}

/// Query string parameters, percent-decoded.
pub fn query_params(url: &str) -> HashMap<String, String> {
    let query = url.split_once('?').map_or("", |(_, q)| q);
    url::form_urlencoded::parse(query.as_bytes())
        .into_owned()
        .collect()
}

/// Store, BM25 index and a ten-claim test file under `dir`, wired into an
/// experiment config with the echo backend.
pub fn experiment_fixture(dir: &std::path::Path) -> climafact::ExperimentConfig {
    use climafact::harness::{BScoreConfig, RetrieverConfig, SCHEMA_VERSION};
    let store = synthetic_store(300, 41);
    store.save(dir.join("store.cfps")).unwrap();
    climafact::InvertedIndex::build(&store)
        .unwrap()
        .save(dir.join("bm25.idx"))
        .unwrap();
    climafact::dataset::write_records(dir.join("test.jsonl"), &claim_fixture()).unwrap();
    climafact::ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        name: "fixture".into(),
        knowledge_source: dir.join("store.cfps"),
        retriever: RetrieverConfig::Bm25 {
            index: dir.join("bm25.idx"),
            params: Default::default(),
            entity_augment: false,
            linker: None,
        },
        k: 1,
        k_sweep: Vec::new(),
        train_dataset: None,
        test_dataset: dir.join("test.jsonl"),
        backend: climafact::GeneratorBackend::Echo,
        seeds: vec![0],
        metrics: vec![
            climafact::metrics::Metric::Rouge1,
            climafact::metrics::Metric::RougeL,
            climafact::metrics::Metric::Acc,
        ],
        bscore: BScoreConfig::default(),
        max_tokens: 200,
        compare_baselines: false,
    }
}

/// Generator service stand-in: answers SUPPORTS with the first context as
/// explanation and classifies everything as REFUTES.
pub fn generator_stub() -> StubServer {
    StubServer::start(|method, url, body| match (method, url) {
        ("GET", "/health") => (200, "{}".into()),
        ("POST", "/generate") => {
            let ctx = body["contexts"][0].as_str().unwrap_or_default();
            (
                200,
                serde_json::json!({ "raw": format!("SUPPORTS; {ctx}") }).to_string(),
            )
        }
        ("POST", "/classify") => (200, r#"{"label":"REFUTES"}"#.into()),
        _ => (404, "{}".into()),
    })
}
