//! Corpus ingestion, cleaning, and sampling.
//!
//! The goal of this module is to turn raw per-collection JSONL exports into
//! balanced, reproducible corpora: language-filtered, de-duplicated, capped
//! per author, and downsampled to a token budget. Every seeded operation is
//! deterministic for a given `(input, seed)` pair.

mod tokenize;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::data::WordList;
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, shuffle};

pub use tokenize::{segment_sentences, tokenize};

/// One narrative: a labeled, author-attributed sequence of tokenized
/// sentences.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub author_id: String,
    pub label: String,
    pub source: String,
    pub raw_text: String,
    sentences: Vec<Vec<String>>,
    token_count: usize,
}

impl Document {
    /// Build a document by segmenting and tokenizing `text`. Returns `None`
    /// when nothing survives tokenization.
    pub fn from_text(
        id: impl Into<String>,
        author_id: impl Into<String>,
        label: impl Into<String>,
        source: impl Into<String>,
        text: &str,
    ) -> Option<Document> {
        let sentences: Vec<Vec<String>> = segment_sentences(text)
            .iter()
            .map(|s| tokenize(s))
            .filter(|toks| !toks.is_empty())
            .collect();
        if sentences.is_empty() {
            return None;
        }
        let token_count = sentences.iter().map(Vec::len).sum();
        Some(Document {
            id: id.into(),
            author_id: author_id.into(),
            label: label.into(),
            source: source.into(),
            raw_text: text.to_string(),
            sentences,
            token_count,
        })
    }

    /// Build a document from already-tokenized sentences; empty sentences
    /// and empty tokens are dropped. Used when re-ordering sentences.
    pub fn from_sentences(
        id: impl Into<String>,
        author_id: impl Into<String>,
        label: impl Into<String>,
        source: impl Into<String>,
        sentences: Vec<Vec<String>>,
    ) -> Option<Document> {
        let sentences: Vec<Vec<String>> = sentences
            .into_iter()
            .map(|s| s.into_iter().filter(|t| !t.is_empty()).collect::<Vec<_>>())
            .filter(|s: &Vec<String>| !s.is_empty())
            .collect();
        if sentences.is_empty() {
            return None;
        }
        let token_count = sentences.iter().map(Vec::len).sum();
        let raw_text = sentences
            .iter()
            .map(|s| s.join(" "))
            .collect::<Vec<_>>()
            .join("\n");
        Some(Document {
            id: id.into(),
            author_id: author_id.into(),
            label: label.into(),
            source: source.into(),
            raw_text,
            sentences,
            token_count,
        })
    }

    pub fn sentences(&self) -> &[Vec<String>] {
        &self.sentences
    }

    pub fn token_count(&self) -> usize {
        self.token_count
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.sentences.iter().flatten().map(String::as_str)
    }

    /// Normalized text used for exact-duplicate detection: tokens joined by
    /// spaces, sentences by newlines.
    pub fn normalized_key(&self) -> String {
        self.sentences
            .iter()
            .map(|s| s.join(" "))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// An ordered collection of documents with derived label and token totals.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    documents: Vec<Document>,
    labels: BTreeSet<String>,
    total_tokens: usize,
}

impl Corpus {
    /// Build a corpus; document ids must be unique.
    pub fn from_documents(documents: Vec<Document>) -> Result<Corpus> {
        let mut seen = HashSet::with_capacity(documents.len());
        for d in &documents {
            if !seen.insert(d.id.as_str()) {
                return Err(Error::DuplicateId(d.id.clone()));
            }
        }
        Ok(Self::from_documents_unchecked(documents))
    }

    fn from_documents_unchecked(documents: Vec<Document>) -> Corpus {
        let labels = documents.iter().map(|d| d.label.clone()).collect();
        let total_tokens = documents.iter().map(|d| d.token_count).sum();
        Corpus {
            documents,
            labels,
            total_tokens,
        }
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn labels(&self) -> &BTreeSet<String> {
        &self.labels
    }

    pub fn total_tokens(&self) -> usize {
        self.total_tokens
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Merge corpora into one; ids must stay unique across the inputs.
    pub fn merge(parts: Vec<Corpus>) -> Result<Corpus> {
        let documents = parts
            .into_iter()
            .flat_map(|c| c.documents)
            .collect::<Vec<_>>();
        Corpus::from_documents(documents)
    }

    /// Subset in corpus order by a predicate on documents.
    pub fn filter(&self, mut keep: impl FnMut(&Document) -> bool) -> Corpus {
        let documents = self
            .documents
            .iter()
            .filter(|d| keep(d))
            .cloned()
            .collect();
        Self::from_documents_unchecked(documents)
    }
}

/// Wire schema for one JSONL record. `text` uses `\n` as the sentence
/// separator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JsonRecord {
    pub id: String,
    pub author: String,
    pub label: String,
    pub source: String,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IssueKind {
    MalformedRecord,
    DuplicateId,
    EmptyDocument,
}

/// A rejected or skipped input record; ingestion reports these instead of
/// silently dropping data.
#[derive(Debug, Clone)]
pub struct IngestIssue {
    pub line: usize,
    pub kind: IssueKind,
    pub message: String,
}

impl fmt::Display for IngestIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug)]
pub struct IngestOutcome {
    pub corpus: Corpus,
    pub issues: Vec<IngestIssue>,
}

/// Read line-delimited JSON records into a corpus.
///
/// Malformed records, duplicate ids (later record loses), and documents
/// with no surviving tokens are collected as issues; only I/O failures are
/// hard errors.
pub fn ingest_jsonl(reader: impl BufRead) -> Result<IngestOutcome> {
    let mut documents: Vec<Document> = Vec::new();
    let mut seen_ids: HashSet<String> = HashSet::new();
    let mut issues = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: JsonRecord = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                issues.push(IngestIssue {
                    line: line_no,
                    kind: IssueKind::MalformedRecord,
                    message: format!("malformed record: {e}"),
                });
                continue;
            }
        };
        if seen_ids.contains(&record.id) {
            issues.push(IngestIssue {
                line: line_no,
                kind: IssueKind::DuplicateId,
                message: format!("duplicate id {:?}; record rejected", record.id),
            });
            continue;
        }
        match Document::from_text(
            record.id.clone(),
            record.author,
            record.label,
            record.source,
            &record.text,
        ) {
            Some(doc) => {
                seen_ids.insert(record.id);
                documents.push(doc);
            }
            None => {
                issues.push(IngestIssue {
                    line: line_no,
                    kind: IssueKind::EmptyDocument,
                    message: format!("document {:?} has no tokens after tokenization", record.id),
                });
            }
        }
    }
    Ok(IngestOutcome {
        corpus: Corpus::from_documents_unchecked(documents),
        issues,
    })
}

/// Write a corpus back out in the ingestion schema (round-trippable).
pub fn write_jsonl(corpus: &Corpus, mut writer: impl Write) -> Result<()> {
    for doc in corpus.documents() {
        let record = JsonRecord {
            id: doc.id.clone(),
            author: doc.author_id.clone(),
            label: doc.label.clone(),
            source: doc.source.clone(),
            text: doc.normalized_key(),
        };
        serde_json::to_writer(&mut writer, &record)
            .map_err(|e| Error::invalid(format!("serialization failed: {e}")))?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug)]
pub struct FilterOutcome {
    pub corpus: Corpus,
    pub removed: usize,
}

/// Keep documents whose stopword ratio meets `threshold`; a cheap stand-in
/// for full language identification on corpora that are overwhelmingly
/// English.
pub fn filter_english(corpus: &Corpus, threshold: f64, stopwords: &WordList) -> FilterOutcome {
    let mut removed = 0usize;
    let filtered = corpus.filter(|doc| {
        let total = doc.token_count();
        if total == 0 {
            removed += 1;
            return false;
        }
        let hits = doc.tokens().filter(|t| stopwords.contains(t)).count();
        let keep = hits as f64 / total as f64 >= threshold;
        if !keep {
            removed += 1;
        }
        keep
    });
    if removed > 0 {
        log::info!("language filter removed {removed} documents");
    }
    FilterOutcome {
        corpus: filtered,
        removed,
    }
}

/// Remove exact duplicates (normalized token sequences); the first document
/// in corpus order survives.
pub fn dedup_exact(corpus: &Corpus) -> (Corpus, usize) {
    let mut seen: HashSet<String> = HashSet::new();
    let mut removed = 0usize;
    let deduped = corpus.filter(|doc| {
        if seen.insert(doc.normalized_key()) {
            true
        } else {
            removed += 1;
            false
        }
    });
    if removed > 0 {
        log::info!("removed {removed} exact duplicates");
    }
    (deduped, removed)
}

/// Cap every author at `n` documents, keeping a seed-determined uniform
/// random subset for authors over the cap. Authors are processed in sorted
/// order against a single seeded generator; output keeps corpus order.
pub fn cap_per_author(corpus: &Corpus, n: usize, seed: u64) -> Result<Corpus> {
    if n < 1 {
        return Err(Error::invalid("per-author cap must be at least 1"));
    }
    let mut by_author: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, doc) in corpus.documents().iter().enumerate() {
        by_author.entry(doc.author_id.as_str()).or_default().push(i);
    }
    let mut rng = rng_from_seed(seed);
    let mut keep: HashSet<usize> = HashSet::with_capacity(corpus.len());
    for (_, mut indices) in by_author {
        if indices.len() > n {
            shuffle(&mut indices, &mut rng);
            indices.truncate(n);
        }
        keep.extend(indices);
    }
    let mut i = 0usize;
    Ok(corpus.filter(|_| {
        let k = keep.contains(&i);
        i += 1;
        k
    }))
}

/// Greedily select whole documents in a seed-determined random order until
/// the token budget is filled; documents that do not fit are skipped.
/// Output keeps corpus order and never exceeds `budget` tokens.
pub fn downsample_to_tokens(corpus: &Corpus, budget: usize, seed: u64) -> Result<Corpus> {
    if budget < 1 {
        return Err(Error::invalid("token budget must be at least 1"));
    }
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut rng = rng_from_seed(seed);
    shuffle(&mut order, &mut rng);
    let mut total = 0usize;
    let mut keep: HashSet<usize> = HashSet::new();
    for idx in order {
        let len = corpus.documents()[idx].token_count();
        if total + len <= budget {
            total += len;
            keep.insert(idx);
        }
    }
    if keep.is_empty() && !corpus.is_empty() {
        log::warn!("token budget {budget} is smaller than every document; output is empty");
    }
    let mut i = 0usize;
    Ok(corpus.filter(|_| {
        let k = keep.contains(&i);
        i += 1;
        k
    }))
}

/// Document-length statistics. The standard deviation uses the population
/// form (divisor N).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusStats {
    pub doc_count: usize,
    pub total_tokens: usize,
    pub mean_doc_len: f64,
    pub pop_stddev_doc_len: f64,
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    stats_over(corpus.documents().iter().map(|d| d.token_count()))
}

/// Per-label statistics, sorted by label.
pub fn label_stats(corpus: &Corpus) -> Vec<(String, CorpusStats)> {
    corpus
        .labels()
        .iter()
        .map(|label| {
            let lengths = corpus
                .documents()
                .iter()
                .filter(|d| &d.label == label)
                .map(|d| d.token_count());
            (label.clone(), stats_over(lengths))
        })
        .collect()
}

fn stats_over(lengths: impl Iterator<Item = usize>) -> CorpusStats {
    let lengths: Vec<usize> = lengths.collect();
    let doc_count = lengths.len();
    let total_tokens: usize = lengths.iter().sum();
    if doc_count == 0 {
        return CorpusStats {
            doc_count: 0,
            total_tokens: 0,
            mean_doc_len: 0.0,
            pop_stddev_doc_len: 0.0,
        };
    }
    let n = doc_count as f64;
    let mean = total_tokens as f64 / n;
    let var = lengths
        .iter()
        .map(|&l| {
            let d = l as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / n;
    CorpusStats {
        doc_count,
        total_tokens,
        mean_doc_len: mean,
        pop_stddev_doc_len: var.sqrt(),
    }
}
