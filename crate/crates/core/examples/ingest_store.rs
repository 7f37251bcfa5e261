//! Ingest a small TSV dump into a passage store and read it back by id.

use std::fs;

use climafact::corpus::{ingest_corpus, InputFormat};
use climafact::{PassageFile, PassageSource};

fn main() -> climafact::Result<()> {
    let dir = tempfile::tempdir()?;
    let tsv = dir.path().join("psgs.tsv");
    let long = vec!["warming"; 230].join(" ");
    fs::write(
        &tsv,
        format!("id\ttext\ttitle\n1\tSea level rose 20 cm last century.\tSea level\n2\t{long}\tGlobal warming\n"),
    )?;

    let (store, stats) = ingest_corpus(&tsv, InputFormat::Tsv, "wikipedia")?;
    println!("{stats:?}");
    let path = dir.path().join("wiki.cfps");
    store.save(&path)?;

    let file = PassageFile::open(&path)?;
    for id in 0..file.len() {
        let p = file.passage(id)?;
        println!(
            "#{id} {:<16} {:>3} words  {}",
            p.title,
            p.word_count,
            &p.text[..p.text.len().min(40)]
        );
    }
    Ok(())
}
