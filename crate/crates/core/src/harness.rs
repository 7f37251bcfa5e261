//! Experiment grid runner: one cell per (retriever, k, dataset setting),
//! with CSV/JSON reports and an SVG depth curve.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{PassageFile, PassageSource};
use crate::dataset::{load_records, ClaimRecord};
use crate::dense::{DenseIndex, DenseRetriever, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::fid::{assemble, FidInput, FidOutput, Generator, GeneratorBackend, DEFAULT_MAX_TOKENS};
use crate::metrics::{
    score_record, BertScorer, EmbeddingSource, EvalReport, Metric, PredictionRow,
};
use crate::retrieval::{Query, Retriever};
use crate::service::ServiceClient;
use crate::sparse::{Bm25Params, EntityLinker, InvertedIndex, LinkerConfig, SparseRetriever};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SWEEP: [usize; 5] = [1, 5, 10, 15, 20];

/// Placeholder substituted with the seed in dataset and embedding paths.
pub const SEED_PLACEHOLDER: &str = "{seed}";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RetrieverConfig {
    Bm25 {
        index: PathBuf,
        #[serde(default)]
        params: Bm25Params,
        #[serde(default)]
        entity_augment: bool,
        #[serde(default)]
        linker: Option<LinkerConfig>,
    },
    Bpr {
        index: PathBuf,
        /// Query vectors keyed by the claim's line ordinal in the test file.
        query_embeddings: PathBuf,
        #[serde(default)]
        n_candidates: Option<usize>,
    },
}

impl RetrieverConfig {
    pub fn name(&self) -> &'static str {
        match self {
            RetrieverConfig::Bm25 {
                entity_augment: true,
                ..
            } => "bm25+entity",
            RetrieverConfig::Bm25 { .. } => "bm25",
            RetrieverConfig::Bpr { .. } => "bpr",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BScoreConfig {
    /// JSONL token-embedding table; without it the remote service is asked.
    pub token_embeddings: Option<PathBuf>,
    pub baseline: f64,
}

impl Default for BScoreConfig {
    fn default() -> Self {
        BScoreConfig {
            token_embeddings: None,
            baseline: 0.85,
        }
    }
}

fn default_metrics() -> Vec<Metric> {
    vec![Metric::Rouge1, Metric::RougeL, Metric::Acc]
}

fn default_max_tokens() -> usize {
    DEFAULT_MAX_TOKENS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    pub knowledge_source: PathBuf,
    pub retriever: RetrieverConfig,
    pub k: usize,
    #[serde(default)]
    pub k_sweep: Vec<usize>,
    /// Routed to the generator service for training; only checked for existence here.
    #[serde(default)]
    pub train_dataset: Option<PathBuf>,
    pub test_dataset: PathBuf,
    pub backend: GeneratorBackend,
    pub seeds: Vec<u64>,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub bscore: BScoreConfig,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: usize,
    #[serde(default)]
    pub compare_baselines: bool,
}

fn seeded(path: &Path, seed: u64) -> PathBuf {
    PathBuf::from(
        path.to_string_lossy()
            .replace(SEED_PLACEHOLDER, &seed.to_string()),
    )
}

fn rebase(base: &Path, path: &mut PathBuf) {
    if path.is_relative() {
        *path = base.join(&*path);
    }
}

fn require(path: &Path, what: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{what} not found: {}",
            path.display()
        )))
    }
}

impl ExperimentConfig {
    /// Reads a config file; relative paths resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut config: ExperimentConfig = serde_json::from_reader(File::open(path)?)?;
        if let Some(base) = path.parent() {
            config.resolve_paths(base);
        }
        if config.name.is_empty() {
            config.name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
        }
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        rebase(base, &mut self.knowledge_source);
        rebase(base, &mut self.test_dataset);
        if let Some(p) = &mut self.train_dataset {
            rebase(base, p);
        }
        match &mut self.retriever {
            RetrieverConfig::Bm25 { index, .. } => rebase(base, index),
            RetrieverConfig::Bpr {
                index,
                query_embeddings,
                ..
            } => {
                rebase(base, index);
                rebase(base, query_embeddings);
            }
        }
        if let Some(p) = &mut self.bscore.token_embeddings {
            rebase(base, p);
        }
    }

    /// Checks the schema and that every referenced artifact exists.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.seeds.is_empty() {
            return Err(Error::invalid("seeds must not be empty"));
        }
        if self.k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if !self.k_sweep.is_empty() && !self.k_sweep.contains(&self.k) {
            return Err(Error::invalid(format!(
                "k = {} is not in k_sweep {:?}",
                self.k, self.k_sweep
            )));
        }
        require(&self.knowledge_source, "knowledge source")?;
        if let Some(p) = &self.train_dataset {
            for &seed in &self.seeds {
                require(&seeded(p, seed), "train dataset")?;
            }
        }
        for &seed in &self.seeds {
            require(&seeded(&self.test_dataset, seed), "test dataset")?;
        }
        match &self.retriever {
            RetrieverConfig::Bm25 { index, .. } => require(index, "BM25 index")?,
            RetrieverConfig::Bpr {
                index,
                query_embeddings,
                ..
            } => {
                require(index, "dense index")?;
                for &seed in &self.seeds {
                    require(&seeded(query_embeddings, seed), "query embeddings")?;
                }
            }
        }
        if self.metrics.contains(&Metric::BScore) {
            match (&self.bscore.token_embeddings, &self.backend) {
                (Some(p), _) => require(p, "token embeddings")?,
                (None, GeneratorBackend::Remote(_)) => {}
                (None, _) => {
                    return Err(Error::invalid(
                        "bscore needs token_embeddings or a remote backend",
                    ))
                }
            }
        }
        Ok(())
    }

    fn with_k(&self, k: usize) -> Self {
        ExperimentConfig { k, ..self.clone() }
    }

    fn with_backend(&self, backend: GeneratorBackend) -> Self {
        ExperimentConfig {
            backend,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedRecord {
    pub claim_id: String,
    pub seed: u64,
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentCell {
    pub name: String,
    pub retriever: String,
    pub backend: String,
    pub k: usize,
    pub seeds: Vec<u64>,
    /// Test records summed over seeds.
    pub test_size: usize,
    pub evaluated: usize,
    pub failures: Vec<FailedRecord>,
    pub report: EvalReport,
    /// False when no record could be evaluated.
    pub valid: bool,
    pub wall_time_ms: u64,
}

/// One line of `predictions.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellPrediction {
    pub cell: String,
    pub k: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub row: PredictionRow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// Retrieve, assemble, generate.
    Fid,
    /// Generate from the claim alone.
    ClaimOnly,
    /// Classify claim plus gold explanation.
    Veracity,
}

enum Outcome {
    Done(PredictionRow),
    Failed(FailedRecord),
}

fn build_retriever(config: &RetrieverConfig, seed: u64) -> Result<Box<dyn Retriever>> {
    match config {
        RetrieverConfig::Bm25 {
            index,
            params,
            entity_augment,
            linker,
        } => {
            let mut r = SparseRetriever::new(InvertedIndex::load(index)?).with_params(*params);
            if *entity_augment {
                r = r.with_linker(EntityLinker::new(linker.clone().unwrap_or_default()));
            }
            Ok(Box::new(r))
        }
        RetrieverConfig::Bpr {
            index,
            query_embeddings,
            n_candidates,
        } => {
            let queries = EmbeddingMatrix::load(seeded(query_embeddings, seed))?;
            let mut r = DenseRetriever::new(DenseIndex::load(index)?, queries)?;
            if let Some(n) = n_candidates {
                r = r.with_candidates(*n);
            }
            Ok(Box::new(r))
        }
    }
}

fn build_scorer(config: &ExperimentConfig) -> Result<Option<BertScorer>> {
    if !config.metrics.contains(&Metric::BScore) {
        return Ok(None);
    }
    let source = match (&config.bscore.token_embeddings, &config.backend) {
        (Some(path), _) => EmbeddingSource::load_table(path)?,
        (None, GeneratorBackend::Remote(service)) => {
            EmbeddingSource::Remote(ServiceClient::new(service.clone()))
        }
        (None, _) => {
            return Err(Error::invalid(
                "bscore needs token_embeddings or a remote backend",
            ))
        }
    };
    Ok(Some(BertScorer {
        source,
        baseline: config.bscore.baseline,
    }))
}

fn parallelism(backend: &GeneratorBackend) -> usize {
    match backend {
        GeneratorBackend::Remote(service) => service.max_in_flight.max(1),
        _ => std::thread::available_parallelism().map_or(1, usize::from),
    }
}

struct CellContext<'a> {
    config: &'a ExperimentConfig,
    mode: Mode,
    store: &'a dyn PassageSource,
    generator: &'a Generator,
    scorer: Option<&'a BertScorer>,
    metrics: Vec<Metric>,
}

impl CellContext<'_> {
    fn process(
        &self,
        retriever: Option<&dyn Retriever>,
        seed: u64,
        ordinal: usize,
        record: &ClaimRecord,
    ) -> Outcome {
        let fail = |stage: &str, e: Error| {
            warn!("claim {}: {stage} failed: {e}", record.claim_id);
            Outcome::Failed(FailedRecord {
                claim_id: record.claim_id.clone(),
                seed,
                stage: stage.to_string(),
                message: e.to_string(),
            })
        };
        let output = match self.mode {
            Mode::Fid => {
                let retriever = retriever.expect("retriever is built for fid cells");
                let query = Query {
                    ordinal: ordinal as u64,
                    text: &record.text,
                };
                let passages = match retriever.retrieve(&query, self.config.k).and_then(|hits| {
                    if hits.is_empty() {
                        return Err(Error::invalid("no passages retrieved"));
                    }
                    hits.iter()
                        .map(|h| self.store.passage(h.passage_id).map(|p| p.text))
                        .collect::<Result<Vec<String>>>()
                }) {
                    Ok(p) => p,
                    Err(e) => return fail("retrieval", e),
                };
                let input = match assemble(
                    &record.claim_id,
                    &record.text,
                    &passages,
                    self.config.max_tokens,
                ) {
                    Ok(i) => i,
                    Err(e) => return fail("assembly", e),
                };
                self.generator.generate(&input)
            }
            Mode::ClaimOnly => {
                FidInput::claim_only(&record.claim_id, &record.text, self.config.max_tokens)
                    .and_then(|input| self.generator.generate(&input))
            }
            Mode::Veracity => {
                let explanation = record.references.join(" ");
                match self.generator.client() {
                    Some(client) => client
                        .classify(&record.claim_id, &record.text, &explanation)
                        .map(|label| FidOutput {
                            label: Some(label),
                            raw: label.to_string(),
                            explanation,
                        }),
                    None => Err(Error::invalid("veracity classifier needs a remote backend")),
                }
            }
        };
        let output = match output {
            Ok(o) => o,
            Err(e) => return fail("generation", e),
        };
        match score_record(&output, record, &self.metrics, self.scorer) {
            Ok(scores) => {
                Outcome::Done(PredictionRow::new(record.claim_id.clone(), &output, scores))
            }
            Err(e) => fail("scoring", e),
        }
    }
}

/// Runs one cell and returns it with its per-record predictions.
pub fn run_cell_with_predictions(
    config: &ExperimentConfig,
) -> Result<(ExperimentCell, Vec<CellPrediction>)> {
    run_mode(config, Mode::Fid)
}

pub fn run_cell(config: &ExperimentConfig) -> Result<ExperimentCell> {
    run_cell_with_predictions(config).map(|(cell, _)| cell)
}

fn run_mode(
    config: &ExperimentConfig,
    mode: Mode,
) -> Result<(ExperimentCell, Vec<CellPrediction>)> {
    config.validate()?;
    let started = Instant::now();
    let store = PassageFile::open(&config.knowledge_source)?;
    let generator = Generator::new(config.backend.clone());
    let scorer = build_scorer(config)?;
    let metrics: Vec<Metric> = match mode {
        Mode::Veracity => vec![Metric::Acc],
        Mode::ClaimOnly => config.metrics.clone(),
        Mode::Fid => config
            .metrics
            .iter()
            .copied()
            .filter(|m| *m != Metric::Acc || config.backend.predicts_labels())
            .collect(),
    };
    let ctx = CellContext {
        config,
        mode,
        store: &store,
        generator: &generator,
        scorer: scorer.as_ref(),
        metrics,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism(&config.backend))
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;

    let mut test_size = 0;
    let mut failures = Vec::new();
    let mut predictions = Vec::new();
    let mut per_seed = Vec::new();
    for &seed in &config.seeds {
        let records = load_records(seeded(&config.test_dataset, seed))?;
        let retriever = match mode {
            Mode::Fid => Some(build_retriever(&config.retriever, seed)?),
            _ => None,
        };
        test_size += records.len();
        let outcomes: Vec<Outcome> = pool.install(|| {
            records
                .par_iter()
                .enumerate()
                .map(|(i, r)| ctx.process(retriever.as_deref(), seed, i, r))
                .collect()
        });
        let mut scores = Vec::new();
        for outcome in outcomes {
            match outcome {
                Outcome::Done(row) => {
                    scores.push(row.scores.clone());
                    predictions.push(CellPrediction {
                        cell: config.name.clone(),
                        k: config.k,
                        seed,
                        row,
                    });
                }
                Outcome::Failed(f) => failures.push(f),
            }
        }
        if !scores.is_empty() {
            per_seed.push(EvalReport::from_scores(&scores));
        }
    }
    let evaluated = predictions.len();
    if evaluated == 0 {
        warn!(
            "cell {:?} (k = {}) evaluated no records",
            config.name, config.k
        );
    }
    let cell = ExperimentCell {
        name: config.name.clone(),
        retriever: match mode {
            Mode::Fid => config.retriever.name().to_string(),
            _ => "none".to_string(),
        },
        backend: config.backend.name().to_string(),
        k: config.k,
        seeds: config.seeds.clone(),
        test_size,
        evaluated,
        failures,
        report: EvalReport::average(&per_seed),
        valid: evaluated > 0,
        wall_time_ms: started.elapsed().as_millis() as u64,
    };
    info!(
        "cell {:?} k={} evaluated={} failed={}",
        cell.name,
        cell.k,
        cell.evaluated,
        cell.failures.len()
    );
    Ok((cell, predictions))
}

/// One cell per k, in the order given.
pub fn run_sweep(base: &ExperimentConfig, k_values: &[usize]) -> Result<Vec<ExperimentCell>> {
    run_sweep_with_predictions(base, k_values).map(|(cells, _)| cells)
}

pub fn run_sweep_with_predictions(
    base: &ExperimentConfig,
    k_values: &[usize],
) -> Result<(Vec<ExperimentCell>, Vec<CellPrediction>)> {
    let mut cells = Vec::with_capacity(k_values.len());
    let mut predictions = Vec::new();
    for &k in k_values {
        let mut config = base.with_k(k);
        config.k_sweep = k_values.to_vec();
        let (cell, preds) = run_cell_with_predictions(&config)?;
        cells.push(cell);
        predictions.extend(preds);
    }
    Ok((cells, predictions))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub name: String,
    pub available: bool,
    pub cell: Option<ExperimentCell>,
}

/// Top1, T5-only (claim-only input), Bert-veracity and FiD rows. Model rows
/// need a reachable remote backend and are marked unavailable otherwise.
pub fn compare_baselines(config: &ExperimentConfig) -> Result<Vec<BaselineRow>> {
    config.validate()?;
    let mut rows = vec![BaselineRow {
        name: "top1".to_string(),
        available: true,
        cell: Some(run_cell(&config.with_backend(GeneratorBackend::Top1))?),
    }];
    let remote = match &config.backend {
        GeneratorBackend::Remote(service) if ServiceClient::new(service.clone()).health() => true,
        GeneratorBackend::Remote(service) => {
            warn!("generator service at {} is not reachable", service.endpoint);
            false
        }
        _ => false,
    };
    for (name, mode) in [
        ("t5_only", Mode::ClaimOnly),
        ("bert_veracity", Mode::Veracity),
        ("fid", Mode::Fid),
    ] {
        let cell = if remote {
            Some(run_mode(config, mode)?.0)
        } else {
            None
        };
        rows.push(BaselineRow {
            name: name.to_string(),
            available: cell.is_some(),
            cell,
        });
    }
    Ok(rows)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

const CELL_COLUMNS: [&str; 13] = [
    "name",
    "retriever",
    "backend",
    "k",
    "seeds",
    "test_size",
    "evaluated",
    "failures",
    "valid",
    "acc",
    "bscore_rs",
    "rouge1",
    "rougeL",
];

fn cell_record(cell: &ExperimentCell) -> Vec<String> {
    let seeds: Vec<String> = cell.seeds.iter().map(u64::to_string).collect();
    vec![
        cell.name.clone(),
        cell.retriever.clone(),
        cell.backend.clone(),
        cell.k.to_string(),
        seeds.join(";"),
        cell.test_size.to_string(),
        cell.evaluated.to_string(),
        cell.failures.len().to_string(),
        cell.valid.to_string(),
        fmt_opt(cell.report.accuracy),
        fmt_opt(cell.report.b_score_rs),
        fmt_opt(cell.report.rouge1_f),
        fmt_opt(cell.report.rouge_l_f),
    ]
}

/// Cell table without timings, so identical runs give identical bytes.
pub fn cells_csv(cells: &[ExperimentCell]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CELL_COLUMNS)?;
    for cell in cells {
        w.write_record(cell_record(cell))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::invalid(e.to_string()))
}

/// `k,acc,bscore_rs,rouge1,rougeL`, sorted by k.
pub fn depth_curve_csv(cells: &[ExperimentCell]) -> Result<String> {
    let mut sorted: Vec<&ExperimentCell> = cells.iter().collect();
    sorted.sort_by_key(|c| c.k);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["k", "acc", "bscore_rs", "rouge1", "rougeL"])?;
    for c in sorted {
        w.write_record([
            c.k.to_string(),
            fmt_opt(c.report.accuracy),
            fmt_opt(c.report.b_score_rs),
            fmt_opt(c.report.rouge1_f),
            fmt_opt(c.report.rouge_l_f),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::invalid(e.to_string()))
}

/// Static line chart of every populated metric against k.
type Series<'a> = (&'a str, &'a str, fn(&EvalReport) -> Option<f64>);
type Polyline<'a> = (&'a str, &'a str, Vec<(f64, f64)>);

pub fn depth_curve_svg(cells: &[ExperimentCell]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 50.0;
    let mut sorted: Vec<&ExperimentCell> = cells.iter().collect();
    sorted.sort_by_key(|c| c.k);
    let series: [Series; 4] = [
        ("acc", "#d62728", |r| r.accuracy),
        ("bscore_rs", "#1f77b4", |r| r.b_score_rs),
        ("rouge1", "#2ca02c", |r| r.rouge1_f),
        ("rougeL", "#9467bd", |r| r.rouge_l_f),
    ];
    let points: Vec<Polyline> = series
        .iter()
        .map(|(name, colour, get)| {
            let pts = sorted
                .iter()
                .filter_map(|c| get(&c.report).map(|v| (c.k as f64, v)))
                .collect();
            (*name, *colour, pts)
        })
        .filter(|(_, _, pts): &(_, _, Vec<_>)| !pts.is_empty())
        .collect();
    let all = points.iter().flat_map(|(_, _, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, 0.0f64, 1.0f64);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x0 > x1 {
        (x0, x1) = (0.0, 1.0);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<line x1="{PAD}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{b}" stroke="black"/>"#,
        b = H - PAD,
        r = W - PAD
    );
    for c in &sorted {
        let x = sx(c.k as f64);
        let _ = writeln!(
            svg,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            H - PAD + 18.0,
            c.k
        );
    }
    for y in [y0, (y0 + y1) / 2.0, y1] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{y:.2}</text>"#,
            PAD - 6.0,
            sy(y) + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">retrieved passages (k)</text>"#,
        W / 2.0,
        H - 10.0
    );
    for (i, (name, colour, pts)) in points.iter().enumerate() {
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#,
            path.join(" ")
        );
        for &(x, y) in pts {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{colour}"/>"#,
                sx(x),
                sy(y)
            );
        }
        let ly = PAD + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{ly:.1}" fill="{colour}">{name}</text>"#,
            W - PAD - 70.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for row in rows {
        serde_json::to_writer(&mut w, row)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `cells.csv`, `cells.json`, `depth_curve.csv`, `depth_curve.svg` and
/// `predictions.jsonl` into `out_dir`.
pub fn write_outputs(
    out_dir: &Path,
    cells: &[ExperimentCell],
    predictions: &[CellPrediction],
) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("cells.csv"), cells_csv(cells)?)?;
    fs::write(
        out_dir.join("cells.json"),
        serde_json::to_string_pretty(cells)?,
    )?;
    fs::write(out_dir.join("depth_curve.csv"), depth_curve_csv(cells)?)?;
    fs::write(out_dir.join("depth_curve.svg"), depth_curve_svg(cells))?;
    write_jsonl(&out_dir.join("predictions.jsonl"), predictions)
}

/// Runs the sweep (or the single cell when `k_sweep` is empty), plus the
/// baseline table if requested, and writes all outputs.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<ExperimentCell>> {
    config.validate()?;
    let ks = if config.k_sweep.is_empty() {
        vec![config.k]
    } else {
        config.k_sweep.clone()
    };
    let (cells, predictions) = run_sweep_with_predictions(config, &ks)?;
    write_outputs(out_dir, &cells, &predictions)?;
    if config.compare_baselines {
        let rows = compare_baselines(config)?;
        fs::write(
            out_dir.join("baselines.json"),
            serde_json::to_string_pretty(&rows)?,
        )?;
        let mut w = csv::Writer::from_path(out_dir.join("baselines.csv"))?;
        let mut header = vec!["baseline", "available"];
        header.extend(CELL_COLUMNS);
        w.write_record(&header)?;
        for row in &rows {
            let mut rec = vec![row.name.clone(), row.available.to_string()];
            match &row.cell {
                Some(cell) => rec.extend(cell_record(cell)),
                None => rec.extend(std::iter::repeat_n(String::new(), CELL_COLUMNS.len())),
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    Ok(cells)
}
