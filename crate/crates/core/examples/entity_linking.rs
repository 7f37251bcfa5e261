//! Entity-augmented BM25 against a local Spotlight-style stand-in.

use climafact::corpus::{Document, PassageStore};
use climafact::sparse::{EntityLinker, InvertedIndex, LinkerConfig, SparseRetriever};

fn main() -> climafact::Result<()> {
    let server = tiny_http::Server::http("127.0.0.1:0").expect("bind");
    let port = server.server_addr().to_ip().expect("ip").port();
    std::thread::spawn(move || {
        for request in server.incoming_requests() {
            let body = r#"{"Resources":[{"@URI":"http://dbpedia.org/resource/Greenhouse_gas","@surfaceForm":"CO2","@offset":"0"}]}"#;
            let _ = request.respond(tiny_http::Response::from_string(body));
        }
    });

    let (store, _) = PassageStore::from_documents(
        "demo",
        [
            ("a", "Greenhouse gas concentrations keep rising."),
            ("b", "CO2 is plant food."),
            ("c", "Glaciers are retreating worldwide."),
        ]
        .map(|(id, body)| Document {
            doc_id: id.into(),
            title: id.into(),
            body: body.into(),
        }),
    )?;
    let cache = tempfile::tempdir()?;
    let linker = EntityLinker::new(LinkerConfig {
        base_url: format!("http://127.0.0.1:{port}"),
        cache_dir: Some(cache.path().to_path_buf()),
        ..Default::default()
    });
    let plain = SparseRetriever::new(InvertedIndex::build(&store)?);
    let augmented = SparseRetriever::new(InvertedIndex::build(&store)?).with_linker(linker);

    let claim = "CO2 emissions warm the planet";
    println!("terms: {:?}", augmented.query_terms(claim));
    for (name, r) in [("plain", &plain), ("augmented", &augmented)] {
        let ids: Vec<String> = r
            .search(claim, 3)
            .iter()
            .map(|h| store.get_passage(h.passage_id).map(|p| p.doc_id.clone()))
            .collect::<climafact::Result<_>>()?;
        println!("{name:>9}: {ids:?}");
    }
    Ok(())
}
