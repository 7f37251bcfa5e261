//! BM25 over an in-memory store, with custom k1/b.

use climafact::corpus::{Document, PassageStore};
use climafact::sparse::{Bm25Params, InvertedIndex, SparseRetriever};
use climafact::{Query, Retriever};

fn main() -> climafact::Result<()> {
    let docs = [
        (
            "arctic",
            "Arctic sea ice has declined sharply since satellite records began in 1979.",
        ),
        (
            "co2",
            "Atmospheric carbon dioxide passed 420 parts per million in 2023.",
        ),
        (
            "coral",
            "Marine heatwaves drive mass coral bleaching on the Great Barrier Reef.",
        ),
        (
            "solar",
            "Solar activity has been flat or slightly declining while temperatures rose.",
        ),
    ];
    let (store, _) = PassageStore::from_documents(
        "demo",
        docs.iter().map(|(id, body)| Document {
            doc_id: id.to_string(),
            title: id.to_string(),
            body: body.to_string(),
        }),
    )?;
    let index = InvertedIndex::build(&store)?;
    println!(
        "{} passages, {} terms, avgdl {:.1}",
        index.num_passages(),
        index.num_terms(),
        index.avgdl()
    );

    for (k1, b) in [(1.2, 0.75), (2.0, 0.0)] {
        let retriever = SparseRetriever::new(index.clone()).with_params(Bm25Params { k1, b });
        let hits = retriever.retrieve(
            &Query {
                ordinal: 0,
                text: "sea ice declined",
            },
            3,
        )?;
        println!("k1={k1} b={b}");
        for h in hits {
            println!(
                "  {} {:.4} {}",
                h.rank,
                h.score,
                store.get_passage(h.passage_id)?.doc_id
            );
        }
    }
    Ok(())
}
