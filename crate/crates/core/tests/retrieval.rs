mod common;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use climafact::dense::{binarize, DenseIndex, DenseRetriever, EmbeddingMatrix};
use climafact::sparse::{Bm25Params, EntityLinker, InvertedIndex, LinkerConfig, SparseRetriever};
use climafact::{PassageFile, Query, Retriever};

use common::oracles::{bm25_exhaustive, gaussian, hamming_scan, random_embeddings, signed_ranking};
use common::{synthetic_store, word, StubServer};

#[test]
fn bm25_matches_exhaustive_oracle() {
    let store = synthetic_store(1000, 7);
    let index = InvertedIndex::build(&store).unwrap();
    let params = Bm25Params::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let len = rng.gen_range(1..=6);
        let mut query: Vec<&str> = (0..len).map(|_| word(&mut rng)).collect();
        if rng.gen_bool(0.1) {
            query.push("unseenterm");
        }
        let hits = index.search(&query.join(" "), 10);
        let oracle = bm25_exhaustive(&store, &query, params.k1, params.b);
        let ids: Vec<u64> = hits.iter().map(|h| h.passage_id).collect();
        let expected: Vec<u64> = oracle.iter().take(10).map(|&(id, _)| id).collect();
        assert_eq!(ids, expected, "query {query:?}");
        for (h, (_, s)) in hits.iter().zip(&oracle) {
            assert!((h.score - s).abs() < 1e-9);
        }
    }
}

#[test]
fn bm25_index_over_store_file() {
    let dir = tempfile::tempdir().unwrap();
    let store = synthetic_store(50, 3);
    let path = dir.path().join("store.cfps");
    store.save(&path).unwrap();
    let from_file = InvertedIndex::build(&PassageFile::open(&path).unwrap()).unwrap();
    assert_eq!(from_file, InvertedIndex::build(&store).unwrap());
    let idx_path = dir.path().join("index.cfix");
    from_file.save(&idx_path).unwrap();
    assert_eq!(InvertedIndex::load(&idx_path).unwrap(), from_file);
}

fn spotlight_stub(calls: Arc<AtomicUsize>) -> StubServer {
    StubServer::start(move |method, url, _| {
        calls.fetch_add(1, Ordering::SeqCst);
        assert_eq!(method, "GET");
        assert!(url.starts_with("/rest/annotate"));
        let params = common::query_params(url);
        assert_eq!(params["confidence"], "0.5");
        let body = if params["text"].contains("Arctic") {
            r#"{"@text":"x","Resources":[{"@URI":"http://dbpedia.org/resource/Sea_ice","@surfaceForm":"Arctic","@offset":"0"}]}"#
        } else {
            r#"{"@text":"x"}"#
        };
        (200, body.to_string())
    })
}

#[test]
fn entity_augmentation_adds_concepts_and_caches() {
    let calls = Arc::new(AtomicUsize::new(0));
    let server = spotlight_stub(Arc::clone(&calls));
    let cache = tempfile::tempdir().unwrap();
    let config = LinkerConfig {
        base_url: server.url.clone(),
        cache_dir: Some(cache.path().to_path_buf()),
        ..Default::default()
    };
    let store = synthetic_store(200, 5);
    let retriever = SparseRetriever::new(InvertedIndex::build(&store).unwrap())
        .with_linker(EntityLinker::new(config));
    assert_eq!(
        retriever.query_terms("Arctic warming"),
        vec!["arctic", "warming", "sea", "ice"]
    );
    assert_eq!(
        retriever.query_terms("Arctic warming"),
        vec!["arctic", "warming", "sea", "ice"]
    );
    assert_eq!(
        calls.load(Ordering::SeqCst),
        1,
        "second lookup is served from cache"
    );
    assert_eq!(retriever.query_terms("drought"), vec!["drought"]);

    let plain = SparseRetriever::new(InvertedIndex::build(&store).unwrap());
    let q = Query {
        ordinal: 0,
        text: "Arctic warming",
    };
    let augmented = retriever.retrieve(&q, 5).unwrap();
    let expected = InvertedIndex::build(&store)
        .unwrap()
        .search("arctic warming sea ice", 5);
    assert_eq!(augmented, expected);
    assert_ne!(augmented, plain.retrieve(&q, 5).unwrap());
}

#[test]
fn linker_outage_degrades_to_plain_bm25() {
    let server = StubServer::start(|_, _, _| (503, "unavailable".to_string()));
    let config = LinkerConfig {
        base_url: server.url.clone(),
        ..Default::default()
    };
    let store = synthetic_store(100, 5);
    let index = InvertedIndex::build(&store).unwrap();
    let augmented = SparseRetriever::new(index.clone()).with_linker(EntityLinker::new(config));
    let plain = SparseRetriever::new(index);
    let q = Query {
        ordinal: 0,
        text: "ocean heat record",
    };
    assert_eq!(
        augmented.retrieve(&q, 10).unwrap(),
        plain.retrieve(&q, 10).unwrap()
    );
}

fn dense_fixture() -> (climafact::PassageStore, EmbeddingMatrix, DenseIndex) {
    let store = synthetic_store(2000, 21);
    let emb = random_embeddings(store.passages().iter().map(|p| p.passage_id), 128, 5);
    let index = DenseIndex::build(&store, &emb, false).unwrap();
    (store, emb, index)
}

#[test]
fn hamming_candidates_match_linear_scan() {
    let (_, emb, index) = dense_fixture();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let q = gaussian(&mut rng, 128);
        let n = rng.gen_range(1..=300);
        let got = index.candidates(&binarize(&q, 128).unwrap(), n).unwrap();
        assert_eq!(got, hamming_scan(&emb, &q, n));
    }
}

#[test]
fn full_candidate_depth_equals_exhaustive_rerank() {
    let (_, emb, index) = dense_fixture();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let q = gaussian(&mut rng, 128);
        let hits = index.search_dense(&q, 10, index.len()).unwrap();
        let oracle = signed_ranking(&emb, &q, 10);
        let got: Vec<(u64, f64)> = hits.iter().map(|h| (h.passage_id, h.score)).collect();
        assert_eq!(got, oracle);
    }
}

#[test]
fn dense_retriever_uses_query_ordinals() {
    let (_, _, index) = dense_fixture();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut queries = EmbeddingMatrix::new(128);
    for i in 0..3 {
        queries.push(i, gaussian(&mut rng, 128)).unwrap();
    }
    let expected = index.search_dense(&queries.rows[1].1, 5, 100).unwrap();
    let retriever = DenseRetriever::new(index, queries)
        .unwrap()
        .with_candidates(100);
    let got = retriever
        .retrieve(
            &Query {
                ordinal: 1,
                text: "",
            },
            5,
        )
        .unwrap();
    assert_eq!(got, expected);
    assert!(retriever
        .retrieve(
            &Query {
                ordinal: 9,
                text: ""
            },
            5
        )
        .is_err());
    assert_eq!(got.len(), 5);
}

#[test]
fn bm25_timing_budget() {
    let store = synthetic_store(1000, 7);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let start = Instant::now();
    let index = InvertedIndex::build(&store).unwrap();
    for _ in 0..100 {
        let q: Vec<&str> = (0..4).map(|_| word(&mut rng)).collect();
        index.search(&q.join(" "), 10);
    }
    assert!(start.elapsed().as_secs_f64() < 5.0);
}
