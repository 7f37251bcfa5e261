//! Binary codes, Hamming candidates and reranking on random embeddings,
//! with recall against an exhaustive rerank at several candidate depths.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use climafact::corpus::{Document, PassageStore};
use climafact::{DenseIndex, EmbeddingMatrix};

const DIM: usize = 128;

fn main() -> climafact::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let gaussian = |rng: &mut ChaCha8Rng| -> Vec<f32> {
        (0..DIM).map(|_| StandardNormal.sample(rng)).collect()
    };
    let n = 2000u64;
    let (store, _) = PassageStore::from_documents(
        "random",
        (0..n).map(|i| Document {
            doc_id: i.to_string(),
            title: String::new(),
            body: format!("passage {i}"),
        }),
    )?;
    let mut emb = EmbeddingMatrix::new(DIM);
    for id in 0..n {
        emb.push(id, gaussian(&mut rng))?;
    }
    let index = DenseIndex::build(&store, &emb, false)?;
    let queries: Vec<Vec<f32>> = (0..100).map(|_| gaussian(&mut rng)).collect();

    for depth in [100, 200, 400, 800] {
        let mut found = 0;
        for q in &queries {
            let truth: HashSet<u64> = index
                .search_dense(q, 10, index.len())?
                .iter()
                .map(|h| h.passage_id)
                .collect();
            found += index
                .search_dense(q, 10, depth)?
                .iter()
                .filter(|h| truth.contains(&h.passage_id))
                .count();
        }
        println!(
            "n_candidates={depth:>4}  recall@10={:.3}",
            found as f64 / 1000.0
        );
    }
    Ok(())
}
