//! ROUGE against several references and rescaled BERTScore.

use climafact::metrics::{
    bert_score_rescaled, rescale, rouge_l, rouge_n, ScoredPair, TokenEmbeddings,
};

fn main() -> climafact::Result<()> {
    let pair = ScoredPair::new(
        "the ice sheet is losing mass",
        vec![
            "greenland is gaining ice".into(),
            "the greenland ice sheet is losing mass".into(),
        ],
    )?;
    let r1 = rouge_n(&pair, 1);
    let rl = rouge_l(&pair);
    println!(
        "ROUGE-1 p={:.3} r={:.3} f={:.3}",
        r1.precision, r1.recall, r1.f1
    );
    println!(
        "ROUGE-L p={:.3} r={:.3} f={:.3}",
        rl.precision, rl.recall, rl.f1
    );

    let tokens = |ts: &[&str]| ts.iter().map(|t| t.to_string()).collect::<Vec<_>>();
    let candidate = TokenEmbeddings::new(
        tokens(&["ice", "melts"]),
        vec![vec![1.0, 0.2, 0.0], vec![0.0, 1.0, 0.3]],
    )?;
    let reference = TokenEmbeddings::new(
        tokens(&["ice", "is", "melting"]),
        vec![
            vec![0.9, 0.1, 0.0],
            vec![0.1, 0.1, 1.0],
            vec![0.0, 0.9, 0.4],
        ],
    )?;
    println!(
        "BERTScore rescaled = {:.3}",
        bert_score_rescaled(&candidate, &[reference], 0.85)?
    );
    println!(
        "rescale(1)={} rescale(0)={:.3}",
        rescale(1.0, 0.85),
        rescale(0.0, 0.85)
    );
    Ok(())
}
