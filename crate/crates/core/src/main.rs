use std::collections::HashMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use serde::Serialize;

use climafact::corpus::{ingest_corpus, InputFormat, PassageFile, PassageSource};
use climafact::dataset::{
    build_fev, feedback_split, load_climate_fever, load_feedback, load_records, stratified_split,
    write_split, DeltaReport, FevMode, LabelPolicy,
};
use climafact::dense::{DenseIndex, DenseRetriever, EmbeddingMatrix};
use climafact::harness::{run_experiment, ExperimentConfig};
use climafact::metrics::{
    evaluate_predictions, krippendorff_alpha, manual_eval_stats, AnnotationSet, BertScorer,
    EmbeddingSource, Metric, PredictionRow, Scale,
};
use climafact::sparse::{EntityLinker, InvertedIndex, LinkerConfig, SparseRetriever};
use climafact::{Error, Query, Result, RetrievalHit, Retriever};

#[derive(Parser)]
#[command(
    name = "climafact",
    version,
    about = "Retrieval-augmented claim verification toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Tsv,
    Jsonl,
}

#[derive(Clone, Copy, ValueEnum)]
enum RetrieverKind {
    Bm25,
    Bpr,
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Cfever,
    Feedback,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Fev2,
    Fev3,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Majority,
    Published,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize and segment a corpus into a passage store.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "tsv")]
        format: Format,
        #[arg(long, default_value = "wikipedia")]
        source_label: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a BM25 inverted index over a passage store.
    IndexSparse {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Binarize passage embeddings into a dense index.
    IndexDense {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        embeddings: PathBuf,
        /// Keep full-precision vectors alongside the codes.
        #[arg(long)]
        keep_vectors: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Retrieve passages for one query or a claims file.
    Retrieve {
        #[arg(long, value_enum)]
        retriever: RetrieverKind,
        #[arg(long)]
        index: PathBuf,
        /// Passage store; adds passage text to each hit.
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(long, conflicts_with = "claims")]
        query: Option<String>,
        /// ClaimRecord JSONL; one output line per claim.
        #[arg(long)]
        claims: Option<PathBuf>,
        #[arg(short, long, default_value_t = 10)]
        k: usize,
        /// Query vectors keyed by claim ordinal (bpr only).
        #[arg(long)]
        query_embeddings: Option<PathBuf>,
        #[arg(long)]
        n_candidates: Option<usize>,
        /// Expand BM25 queries with entity-linked concepts.
        #[arg(long)]
        entity_augment: bool,
        #[arg(long)]
        linker_url: Option<String>,
        #[arg(long)]
        linker_cache: Option<PathBuf>,
    },
    /// Build claim/explanation datasets and splits.
    BuildDataset {
        #[arg(long, value_enum)]
        source: Source,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "fev2")]
        mode: Mode,
        #[arg(long, value_enum, default_value = "majority")]
        policy: Policy,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score stored predictions against a dataset.
    Evaluate {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "rouge1,rougeL,acc")]
        metrics: String,
        /// JSONL token-embedding table for bscore.
        #[arg(long)]
        token_embeddings: Option<PathBuf>,
        #[arg(long, default_value_t = 0.85)]
        baseline: f64,
        /// Manual-evaluation CSV (`item_id,annotator_id,task,value`).
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long, default_value = "T1")]
        judgment_task: String,
        #[arg(long, default_value = "T2")]
        rank_task: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment config and write reports.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Serialize)]
struct HitOut {
    passage_id: u64,
    score: f64,
    rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    text: Option<String>,
}

#[derive(Serialize)]
struct RetrieveOut<'a> {
    claim_id: &'a str,
    hits: Vec<HitOut>,
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn hits_out(hits: Vec<RetrievalHit>, store: Option<&PassageFile>) -> Result<Vec<HitOut>> {
    hits.into_iter()
        .map(|h| {
            let text = match store {
                Some(s) => Some(s.passage(h.passage_id)?.text),
                None => None,
            };
            Ok(HitOut {
                passage_id: h.passage_id,
                score: h.score,
                rank: h.rank,
                text,
            })
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn retrieve(
    kind: RetrieverKind,
    index: &Path,
    store: Option<PathBuf>,
    query: Option<String>,
    claims: Option<PathBuf>,
    k: usize,
    query_embeddings: Option<PathBuf>,
    n_candidates: Option<usize>,
    entity_augment: bool,
    linker_url: Option<String>,
    linker_cache: Option<PathBuf>,
) -> Result<()> {
    let retriever: Box<dyn Retriever> = match kind {
        RetrieverKind::Bm25 => {
            let mut r = SparseRetriever::new(InvertedIndex::load(index)?);
            if entity_augment {
                let mut config = LinkerConfig::default();
                if let Some(url) = linker_url {
                    config.base_url = url;
                }
                config.cache_dir = linker_cache;
                r = r.with_linker(EntityLinker::new(config));
            }
            Box::new(r)
        }
        RetrieverKind::Bpr => {
            let path = query_embeddings.ok_or_else(|| {
                Error::InvalidArgument("bpr retrieval needs --query-embeddings".into())
            })?;
            let mut r =
                DenseRetriever::new(DenseIndex::load(index)?, EmbeddingMatrix::load(path)?)?;
            if let Some(n) = n_candidates {
                r = r.with_candidates(n);
            }
            Box::new(r)
        }
    };
    let store = store.map(PassageFile::open).transpose()?;
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let queries: Vec<(String, String)> = match (query, claims) {
        (Some(q), None) => vec![("query".to_string(), q)],
        (None, Some(path)) => load_records(path)?
            .into_iter()
            .map(|r| (r.claim_id, r.text))
            .collect(),
        _ => {
            return Err(Error::InvalidArgument(
                "give exactly one of --query or --claims".into(),
            ))
        }
    };
    for (ordinal, (claim_id, text)) in queries.iter().enumerate() {
        let hits = retriever.retrieve(
            &Query {
                ordinal: ordinal as u64,
                text,
            },
            k,
        )?;
        let row = RetrieveOut {
            claim_id,
            hits: hits_out(hits, store.as_ref())?,
        };
        serde_json::to_writer(&mut out, &row)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

fn build_dataset(
    source: Source,
    input: &Path,
    mode: Mode,
    policy: Policy,
    seed: u64,
    out: &Path,
) -> Result<()> {
    match source {
        Source::Cfever => {
            let mode = match mode {
                Mode::Fev2 => FevMode::Fev2,
                Mode::Fev3 => FevMode::Fev3,
            };
            let policy = match policy {
                Policy::Majority => LabelPolicy::Majority,
                Policy::Published => LabelPolicy::Published,
            };
            let (records, report) = build_fev(&load_climate_fever(input)?, mode, policy)?;
            let split = stratified_split(&records, mode.default_ratios(), seed)?;
            write_split(out, &split)?;
            let delta = DeltaReport::new(mode, &report);
            if !delta.is_exact() {
                log::warn!(
                    "{} claims / {} pairs differ from the published {} / {}",
                    delta.actual_claims,
                    delta.actual_pairs,
                    delta.expected_claims,
                    delta.expected_pairs
                );
            }
            write_json(&out.join("build_report.json"), &report)?;
            write_json(&out.join("delta_report.json"), &delta)?;
            info!(
                "wrote {:?} split of {} claims to {}",
                split.sizes(),
                records.len(),
                out.display()
            );
        }
        Source::Feedback => {
            let records = load_feedback(input)?;
            let split = feedback_split(&records, seed)?;
            write_split(out, &split)?;
            info!(
                "wrote {:?} split of {} pairs to {}",
                split.sizes(),
                records.len(),
                out.display()
            );
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn evaluate(
    predictions: &Path,
    dataset: &Path,
    metrics: &str,
    token_embeddings: Option<PathBuf>,
    baseline: f64,
    annotations: Option<PathBuf>,
    judgment_task: &str,
    rank_task: &str,
    out: &Path,
) -> Result<()> {
    let metrics = Metric::parse_list(metrics)?;
    let records = load_records(dataset)?;
    let preds: Vec<PredictionRow> = fs::read_to_string(predictions)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Malformed {
                line: i as u64 + 1,
                message: e.to_string(),
            })
        })
        .collect::<Result<_>>()?;
    let scorer = match token_embeddings {
        Some(path) => Some(BertScorer {
            source: EmbeddingSource::load_table(path)?,
            baseline,
        }),
        None if metrics.contains(&Metric::BScore) => {
            return Err(Error::InvalidArgument(
                "bscore needs --token-embeddings".into(),
            ));
        }
        None => None,
    };
    let (mut report, _) = evaluate_predictions(&preds, &records, &metrics, scorer.as_ref())?;
    if let Some(path) = annotations {
        let judgments = AnnotationSet::from_csv(&path, judgment_task, Scale::Nominal)?;
        let ranks = AnnotationSet::from_csv(&path, rank_task, Scale::Ordinal)?;
        if !judgments.is_empty() {
            report.alpha = Some(krippendorff_alpha(&judgments)?);
        }
        let truth: HashMap<String, String> = records
            .iter()
            .map(|r| (r.claim_id.clone(), r.overall_label.to_string()))
            .collect();
        let stats = manual_eval_stats(&judgments, &ranks, &truth);
        report.mar = stats.mar;
        report.v_agree = stats.v_agree;
        report.counts.insert("mar".into(), stats.mar_items);
        report.counts.insert("v_agree".into(), stats.v_agree_items);
    }
    write_json(out, &report)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest {
            input,
            format,
            source_label,
            out,
        } => {
            let format = match format {
                Format::Tsv => InputFormat::Tsv,
                Format::Jsonl => InputFormat::Jsonl,
            };
            let (store, stats) = ingest_corpus(&input, format, &source_label)?;
            store.save(&out)?;
            info!(
                "{} documents ({} empty) -> {} passages, {} words",
                stats.documents, stats.skipped_empty, stats.passages, stats.words
            );
        }
        Command::IndexSparse { store, out } => {
            let index = InvertedIndex::build(&PassageFile::open(store)?)?;
            index.save(&out)?;
            info!(
                "{} passages, {} terms",
                index.num_passages(),
                index.num_terms()
            );
        }
        Command::IndexDense {
            store,
            embeddings,
            keep_vectors,
            out,
        } => {
            let store = PassageFile::open(store)?;
            let index =
                DenseIndex::build(&store, &EmbeddingMatrix::load(embeddings)?, keep_vectors)?;
            index.save(&out)?;
            info!("{} codes of {} bits", index.len(), index.dim());
        }
        Command::Retrieve {
            retriever,
            index,
            store,
            query,
            claims,
            k,
            query_embeddings,
            n_candidates,
            entity_augment,
            linker_url,
            linker_cache,
        } => retrieve(
            retriever,
            &index,
            store,
            query,
            claims,
            k,
            query_embeddings,
            n_candidates,
            entity_augment,
            linker_url,
            linker_cache,
        )?,
        Command::BuildDataset {
            source,
            input,
            mode,
            policy,
            seed,
            out,
        } => build_dataset(source, &input, mode, policy, seed, &out)?,
        Command::Evaluate {
            predictions,
            dataset,
            metrics,
            token_embeddings,
            baseline,
            annotations,
            judgment_task,
            rank_task,
            out,
        } => evaluate(
            &predictions,
            &dataset,
            &metrics,
            token_embeddings,
            baseline,
            annotations,
            &judgment_task,
            &rank_task,
            &out,
        )?,
        Command::Experiment { config, out } => {
            let config = ExperimentConfig::load(&config)?;
            let cells = run_experiment(&config, &out)?;
            let failed: usize = cells.iter().map(|c| c.failures.len()).sum();
            info!(
                "{} cells, {} failed records, reports in {}",
                cells.len(),
                failed,
                out.display()
            );
        }
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
