//! Knowledge-source ingestion: text normalization, 100-word segmentation and
//! the persisted passage store.
//!
//! A store file is laid out as
//!
//! ```text
//! "CFPS0001" | u64 count | records... | offset table (count x u64) | source label | u32 label length
//! ```
//!
//! where each record is `u64 passage_id` followed by the length-prefixed
//! (`u32`) UTF-8 strings `doc_id`, `title` and `text`. All integers are
//! little-endian. The offset table holds the absolute file offset of every
//! record so [`PassageFile`] can serve lookups without reading the records.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::Path;
use std::sync::Mutex;

use log::warn;
use rayon::prelude::*;
use serde::Deserialize;

use crate::binio;
use crate::error::{Error, Result};

pub const STORE_MAGIC: &[u8; 8] = b"CFPS0001";

/// Maximum number of words in one passage.
pub const PASSAGE_WORDS: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub title: String,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Passage {
    pub passage_id: u64,
    pub doc_id: String,
    pub title: String,
    pub text: String,
    pub word_count: usize,
}

/// Random access to passages by dense id.
pub trait PassageSource: Sync {
    fn len(&self) -> u64;

    fn passage(&self, passage_id: u64) -> Result<Passage>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    /// DPR-style `id<TAB>text<TAB>title` rows with a header line.
    Tsv,
    /// One `{"doc_id", "title", "body"}` object per line.
    Jsonl,
}

impl std::str::FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(InputFormat::Tsv),
            "jsonl" => Ok(InputFormat::Jsonl),
            other => Err(Error::invalid(format!("unknown input format {other:?}"))),
        }
    }
}

/// Collapses whitespace runs to one space, trims both ends and drops
/// control characters.
pub fn normalize_text(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for c in raw.chars() {
        if c.is_whitespace() {
            pending_space = true;
        } else if c.is_control() {
            continue;
        } else {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        }
    }
    out
}

/// [`normalize_text`] over raw bytes, rejecting invalid UTF-8.
pub fn normalize_bytes(raw: &[u8]) -> Result<String> {
    let text = std::str::from_utf8(raw).map_err(|e| Error::InvalidUtf8 {
        offset: e.valid_up_to(),
    })?;
    Ok(normalize_text(text))
}

pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Greedy left-to-right chunks of [`PASSAGE_WORDS`] words. Passage ids are
/// left at zero; the store assigns them.
pub fn segment_document(doc: &Document) -> Vec<Passage> {
    let words: Vec<&str> = doc.body.split_whitespace().collect();
    words
        .chunks(PASSAGE_WORDS)
        .map(|chunk| Passage {
            passage_id: 0,
            doc_id: doc.doc_id.clone(),
            title: doc.title.clone(),
            text: chunk.join(" "),
            word_count: chunk.len(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestStats {
    pub documents: u64,
    pub skipped_empty: u64,
    pub passages: u64,
    pub words: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PassageStore {
    passages: Vec<Passage>,
    source_label: String,
}

impl PassageStore {
    pub fn new(source_label: impl Into<String>) -> Self {
        PassageStore {
            passages: Vec::new(),
            source_label: source_label.into(),
        }
    }

    /// Segments the documents in order and assigns dense passage ids.
    /// Empty bodies are skipped with a warning.
    pub fn from_documents(
        source_label: impl Into<String>,
        docs: impl IntoIterator<Item = Document>,
    ) -> Result<(Self, IngestStats)> {
        let mut builder = StoreBuilder::new(source_label);
        for doc in docs {
            builder.push(doc)?;
        }
        Ok(builder.finish())
    }

    pub fn source_label(&self) -> &str {
        &self.source_label
    }

    pub fn count(&self) -> u64 {
        self.passages.len() as u64
    }

    pub fn passages(&self) -> &[Passage] {
        &self.passages
    }

    pub fn get_passage(&self, passage_id: u64) -> Result<&Passage> {
        usize::try_from(passage_id)
            .ok()
            .and_then(|i| self.passages.get(i))
            .ok_or(Error::NotFound {
                kind: "passage",
                id: passage_id,
            })
    }

    pub fn total_words(&self) -> u64 {
        self.passages.iter().map(|p| p.word_count as u64).sum()
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(STORE_MAGIC)?;
        binio::write_u64(w, self.count())?;
        let mut offsets = Vec::with_capacity(self.passages.len());
        let mut pos = 16u64;
        for p in &self.passages {
            offsets.push(pos);
            binio::write_u64(w, p.passage_id)?;
            binio::write_str(w, &p.doc_id)?;
            binio::write_str(w, &p.title)?;
            binio::write_str(w, &p.text)?;
            pos += 8 + 12 + (p.doc_id.len() + p.title.len() + p.text.len()) as u64;
        }
        for off in offsets {
            binio::write_u64(w, off)?;
        }
        w.write_all(self.source_label.as_bytes())?;
        binio::write_u32(w, self.source_label.len() as u32)?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Reads every record into memory. Use [`PassageFile`] for large stores.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = PassageFile::open(path)?;
        let mut r = BufReader::new(File::open(path)?);
        r.seek(SeekFrom::Start(16))?;
        let mut passages = Vec::with_capacity(file.offsets.len());
        for expected in 0..file.len() {
            let p = read_record(&mut r).map_err(|e| Error::format(path, e.to_string()))?;
            if p.passage_id != expected {
                return Err(Error::format(
                    path,
                    format!("record {expected} carries passage id {}", p.passage_id),
                ));
            }
            passages.push(p);
        }
        Ok(PassageStore {
            passages,
            source_label: file.source_label,
        })
    }
}

impl PassageSource for PassageStore {
    fn len(&self) -> u64 {
        self.count()
    }

    fn passage(&self, passage_id: u64) -> Result<Passage> {
        self.get_passage(passage_id).cloned()
    }
}

fn read_record<R: Read>(r: &mut R) -> std::io::Result<Passage> {
    let passage_id = binio::read_u64(r)?;
    let doc_id = binio::read_str(r)?;
    let title = binio::read_str(r)?;
    let text = binio::read_str(r)?;
    let word_count = word_count(&text);
    Ok(Passage {
        passage_id,
        doc_id,
        title,
        text,
        word_count,
    })
}

/// Incremental builder used by the ingestion paths.
struct StoreBuilder {
    store: PassageStore,
    seen: HashSet<String>,
    stats: IngestStats,
    pending: Vec<Document>,
}

const SEGMENT_BATCH: usize = 4096;

impl StoreBuilder {
    fn new(source_label: impl Into<String>) -> Self {
        StoreBuilder {
            store: PassageStore::new(source_label),
            seen: HashSet::new(),
            stats: IngestStats::default(),
            pending: Vec::new(),
        }
    }

    fn push(&mut self, mut doc: Document) -> Result<()> {
        if !self.seen.insert(doc.doc_id.clone()) {
            return Err(Error::DuplicateDocument(doc.doc_id));
        }
        self.stats.documents += 1;
        doc.body = normalize_text(&doc.body);
        doc.title = normalize_text(&doc.title);
        if doc.body.is_empty() {
            warn!("skipping document {:?} with empty body", doc.doc_id);
            self.stats.skipped_empty += 1;
            return Ok(());
        }
        self.pending.push(doc);
        if self.pending.len() >= SEGMENT_BATCH {
            self.flush();
        }
        Ok(())
    }

    // Segments the pending batch in parallel; collect() keeps input order.
    fn flush(&mut self) {
        let segmented: Vec<Vec<Passage>> = self.pending.par_iter().map(segment_document).collect();
        self.pending.clear();
        for mut p in segmented.into_iter().flatten() {
            p.passage_id = self.store.passages.len() as u64;
            self.stats.passages += 1;
            self.stats.words += p.word_count as u64;
            self.store.passages.push(p);
        }
    }

    fn finish(mut self) -> (PassageStore, IngestStats) {
        self.flush();
        (self.store, self.stats)
    }
}

#[derive(Deserialize)]
struct JsonlDocument {
    doc_id: String,
    #[serde(default)]
    title: String,
    body: String,
}

/// Reads a TSV or JSONL knowledge source into a store.
pub fn ingest_corpus(
    source: impl AsRef<Path>,
    format: InputFormat,
    source_label: &str,
) -> Result<(PassageStore, IngestStats)> {
    let mut reader = BufReader::new(File::open(source.as_ref())?);
    let mut builder = StoreBuilder::new(source_label);
    let mut buf = Vec::new();
    let mut line_no = 0u64;
    let mut offset = 0usize;
    loop {
        buf.clear();
        let n = reader.read_until(b'\n', &mut buf)?;
        if n == 0 {
            break;
        }
        line_no += 1;
        let line_start = offset;
        offset += n;
        let line = std::str::from_utf8(&buf).map_err(|e| Error::InvalidUtf8 {
            offset: line_start + e.valid_up_to(),
        })?;
        let line = line.trim_end_matches(['\n', '\r']);
        if line.trim().is_empty() {
            continue;
        }
        let doc = match format {
            InputFormat::Tsv => {
                if line_no == 1 {
                    if line != "id\ttext\ttitle" {
                        return Err(Error::Malformed {
                            line: 1,
                            message: format!(
                                "expected header \"id\\ttext\\ttitle\", found {line:?}"
                            ),
                        });
                    }
                    continue;
                }
                parse_tsv_row(line).map_err(|message| Error::Malformed {
                    line: line_no,
                    message,
                })?
            }
            InputFormat::Jsonl => {
                let d: JsonlDocument =
                    serde_json::from_str(line).map_err(|e| Error::Malformed {
                        line: line_no,
                        message: e.to_string(),
                    })?;
                Document {
                    doc_id: d.doc_id,
                    title: d.title,
                    body: d.body,
                }
            }
        };
        builder.push(doc)?;
    }
    Ok(builder.finish())
}

fn parse_tsv_row(line: &str) -> std::result::Result<Document, String> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 3 {
        return Err(format!(
            "expected 3 tab-separated columns, found {}",
            cols.len()
        ));
    }
    if cols[0].is_empty() {
        return Err("empty id column".to_string());
    }
    Ok(Document {
        doc_id: unquote(cols[0]),
        body: unquote(cols[1]),
        title: unquote(cols[2]),
    })
}

// DPR dumps wrap fields in double quotes and double any inner quote.
fn unquote(field: &str) -> String {
    if field.len() >= 2 && field.starts_with('"') && field.ends_with('"') {
        field[1..field.len() - 1].replace("\"\"", "\"")
    } else {
        field.to_string()
    }
}

/// Read-only view over a persisted store that loads records on demand.
pub struct PassageFile {
    file: Mutex<File>,
    offsets: Vec<u64>,
    source_label: String,
}

impl PassageFile {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bad = |m: String| Error::format(path, m);
        let mut file = File::open(path)?;
        let file_len = file.metadata()?.len();
        binio::expect_magic(&mut file, STORE_MAGIC).map_err(|e| bad(e.to_string()))?;
        let count = binio::read_u64(&mut file).map_err(|e| bad(e.to_string()))?;
        if file_len < 20 {
            return Err(bad("truncated store".into()));
        }
        file.seek(SeekFrom::Start(file_len - 4))?;
        let label_len = binio::read_u32(&mut file)? as u64;
        let table_bytes = count
            .checked_mul(8)
            .ok_or_else(|| bad("passage count overflows".into()))?;
        let table_start = file_len
            .checked_sub(4 + label_len + table_bytes)
            .filter(|&s| s >= 16)
            .ok_or_else(|| bad("offset table does not fit in file".into()))?;
        file.seek(SeekFrom::Start(table_start))?;
        let mut r = BufReader::new(&mut file);
        let mut offsets = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let off = binio::read_u64(&mut r)?;
            if off < 16 || off >= table_start {
                return Err(bad(format!("record offset {off} out of bounds")));
            }
            offsets.push(off);
        }
        let mut label = vec![0u8; label_len as usize];
        r.read_exact(&mut label)?;
        let source_label = String::from_utf8(label).map_err(|e| bad(e.to_string()))?;
        drop(r);
        Ok(PassageFile {
            file: Mutex::new(file),
            offsets,
            source_label,
        })
    }

    pub fn source_label(&self) -> &str {
        &self.source_label
    }
}

impl PassageSource for PassageFile {
    fn len(&self) -> u64 {
        self.offsets.len() as u64
    }

    fn passage(&self, passage_id: u64) -> Result<Passage> {
        let off = usize::try_from(passage_id)
            .ok()
            .and_then(|i| self.offsets.get(i))
            .copied()
            .ok_or(Error::NotFound {
                kind: "passage",
                id: passage_id,
            })?;
        let mut file = self.file.lock().unwrap_or_else(|e| e.into_inner());
        file.seek(SeekFrom::Start(off))?;
        let p = read_record(&mut BufReader::new(&mut *file))?;
        Ok(p)
    }
}
