//! N-gram feature engineering: extraction, blocklist filtering, frequency
//! selection, and binary vectorization.
//!
//! N-grams never cross sentence boundaries. Selection keeps the k most
//! frequent surviving n-grams with a deterministic lexicographic tie-break,
//! and vectors are binary presence sets over the selected vocabulary.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;

use crate::corpus::{Corpus, Document};
use crate::data::WordList;
use crate::error::{Error, Result};

/// A token sequence of order 1..=3. Displays underscore-joined ("i_ran").
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NGram(pub Vec<String>);

impl NGram {
    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn from_tokens(tokens: &[&str]) -> NGram {
        NGram(tokens.iter().map(|t| t.to_string()).collect())
    }
}

impl fmt::Display for NGram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.join("_"))
    }
}

/// Words whose presence anywhere in an n-gram disqualifies it as a feature.
#[derive(Debug, Clone, Default)]
pub struct Blocklist {
    words: WordList,
}

impl Blocklist {
    pub fn new(words: WordList) -> Blocklist {
        Blocklist { words }
    }

    /// The default blocklist: explicit genre giveaways for dream reports.
    pub fn default_dream_words() -> Blocklist {
        Blocklist {
            words: WordList::from_lines(crate::data::default_blocklist_text()),
        }
    }

    pub fn empty() -> Blocklist {
        Blocklist::default()
    }

    pub fn from_path(path: &std::path::Path) -> std::io::Result<Blocklist> {
        Ok(Blocklist {
            words: WordList::from_path(path)?,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Whole-token matching: "daydream" does not contain "dream".
    pub fn blocks(&self, ngram: &NGram) -> bool {
        ngram.0.iter().any(|tok| self.words.contains(tok))
    }
}

/// All contiguous n-grams of order 1..=n_max per sentence, with
/// multiplicities.
pub fn extract_ngrams(doc: &Document, n_max: usize) -> HashMap<NGram, u64> {
    let mut counts: HashMap<NGram, u64> = HashMap::new();
    for sentence in doc.sentences() {
        for n in 1..=n_max {
            if sentence.len() < n {
                break;
            }
            for window in sentence.windows(n) {
                *counts.entry(NGram(window.to_vec())).or_insert(0) += 1;
            }
        }
    }
    counts
}

/// Drop every n-gram containing a blocklisted word as a whole token.
pub fn apply_blocklist(
    mut ngrams: HashMap<NGram, u64>,
    blocklist: &Blocklist,
) -> HashMap<NGram, u64> {
    ngrams.retain(|ng, _| !blocklist.blocks(ng));
    ngrams
}

/// What "most frequent" counts: total corpus occurrences (default) or the
/// number of documents containing the n-gram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrequencyMode {
    #[default]
    Corpus,
    Document,
}

#[derive(Debug, Clone)]
pub struct VocabEntry {
    pub ngram: NGram,
    pub train_frequency: u64,
}

/// The selected feature space: dense indices 0..len over the top-k
/// surviving n-grams of the training corpus.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    index: HashMap<NGram, usize>,
    entries: Vec<VocabEntry>,
    n_max: usize,
    k: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn index_of(&self, ngram: &NGram) -> Option<usize> {
        self.index.get(ngram).copied()
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    pub fn ngram(&self, index: usize) -> &NGram {
        &self.entries[index].ngram
    }

    /// TSV dump: index, underscore-joined n-gram, training frequency.
    pub fn write_tsv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "index\tngram\ttrain_frequency")?;
        for (i, e) in self.entries.iter().enumerate() {
            writeln!(w, "{i}\t{}\t{}", e.ngram, e.train_frequency)?;
        }
        Ok(())
    }

    /// Hex digest over the entry list; model files embed it so a model is
    /// never applied against the wrong feature space.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        for e in &self.entries {
            hasher.update(e.ngram.to_string().as_bytes());
            hasher.update(b"\t");
            hasher.update(e.train_frequency.to_le_bytes());
            hasher.update(b"\n");
        }
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Select the k most frequent blocklist-surviving n-grams of the training
/// corpus. Ties at the boundary break lexicographically (smaller n-gram
/// wins), so selection is deterministic.
pub fn select_top_k(
    train: &Corpus,
    k: usize,
    n_max: usize,
    blocklist: &Blocklist,
    mode: FrequencyMode,
) -> Result<Vocabulary> {
    if k < 1 {
        return Err(Error::invalid("feature count k must be at least 1"));
    }
    if n_max < 1 {
        return Err(Error::invalid("n_max must be at least 1"));
    }
    let mut totals: HashMap<NGram, u64> = HashMap::new();
    for doc in train.documents() {
        let doc_counts = apply_blocklist(extract_ngrams(doc, n_max), blocklist);
        for (ng, c) in doc_counts {
            let increment = match mode {
                FrequencyMode::Corpus => c,
                FrequencyMode::Document => 1,
            };
            *totals.entry(ng).or_insert(0) += increment;
        }
    }
    let mut ranked: Vec<(NGram, u64)> = totals.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    if ranked.len() < k {
        log::warn!(
            "requested {k} features but only {} n-grams survive selection",
            ranked.len()
        );
    }
    ranked.truncate(k);
    let entries: Vec<VocabEntry> = ranked
        .into_iter()
        .map(|(ngram, train_frequency)| VocabEntry {
            ngram,
            train_frequency,
        })
        .collect();
    let index = entries
        .iter()
        .enumerate()
        .map(|(i, e)| (e.ngram.clone(), i))
        .collect();
    Ok(Vocabulary {
        index,
        entries,
        n_max,
        k,
    })
}

/// Binary presence vector: the sorted set of vocabulary indices active in a
/// document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureVector {
    pub doc_id: String,
    active: Vec<usize>,
}

impl FeatureVector {
    /// Construct from raw indices (deduplicated and sorted).
    pub fn from_indices(doc_id: impl Into<String>, mut indices: Vec<usize>) -> FeatureVector {
        indices.sort_unstable();
        indices.dedup();
        FeatureVector {
            doc_id: doc_id.into(),
            active: indices,
        }
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }
}

/// Map a document onto the vocabulary; out-of-vocabulary n-grams are
/// ignored and repeats collapse to presence.
pub fn vectorize(doc: &Document, vocab: &Vocabulary) -> FeatureVector {
    let counts = extract_ngrams(doc, vocab.n_max());
    let indices: Vec<usize> = counts
        .keys()
        .filter_map(|ng| vocab.index_of(ng))
        .collect();
    FeatureVector::from_indices(doc.id.clone(), indices)
}
