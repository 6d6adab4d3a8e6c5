//! Surface discourse-connective counting.
//!
//! Counting is case-insensitive (tokens are already lowercase), respects
//! token boundaries, never crosses sentence boundaries, and applies
//! longest-match-first: tokens consumed by a multiword connective are not
//! re-counted for its sub-connectives.

use std::collections::HashMap;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Connectives the bundled lexicon marks as high-frequency (the compact
/// report view).
const FREQUENT: [&str; 28] = [
    "but",
    "since",
    "until",
    "though",
    "after",
    "although",
    "when",
    "so that",
    "however",
    "even though",
    "once",
    "so",
    "or",
    "even if",
    "earlier",
    "then",
    "before",
    "finally",
    "while",
    "because",
    "if",
    "later",
    "as",
    "still",
    "if then",
    "instead",
    "also",
    "yet",
];

/// A connective lexicon: token sequences of one to three tokens. "and" is
/// never accepted as a single-token connective.
#[derive(Debug, Clone)]
pub struct MarkerLexicon {
    connectives: Vec<Vec<String>>,
    frequent: Vec<bool>,
    by_first: HashMap<String, Vec<usize>>,
}

impl MarkerLexicon {
    /// Parse the file format: one connective per line, tokens
    /// space-separated, lowercase; comment lines start with '#'.
    pub fn from_lines(text: &str) -> Result<MarkerLexicon> {
        let mut connectives: Vec<Vec<String>> = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let tokens: Vec<String> = line.split_whitespace().map(|t| t.to_lowercase()).collect();
            if tokens.len() > 3 {
                return Err(Error::invalid(format!(
                    "connective {line:?} has more than three tokens"
                )));
            }
            if tokens == ["and"] {
                return Err(Error::invalid(
                    "\"and\" is excluded as a discourse connective",
                ));
            }
            if connectives.contains(&tokens) {
                continue;
            }
            connectives.push(tokens);
        }
        let frequent = connectives
            .iter()
            .map(|c| FREQUENT.contains(&c.join(" ").as_str()))
            .collect();
        let mut by_first: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, conn) in connectives.iter().enumerate() {
            by_first.entry(conn[0].clone()).or_default().push(i);
        }
        // longest first so multiword matches shadow their prefixes
        for ids in by_first.values_mut() {
            ids.sort_by_key(|&i| std::cmp::Reverse(connectives[i].len()));
        }
        Ok(MarkerLexicon {
            connectives,
            frequent,
            by_first,
        })
    }

    /// The bundled 60-connective lexicon.
    pub fn bundled() -> MarkerLexicon {
        MarkerLexicon::from_lines(crate::data::CONNECTIVES_RAW)
            .expect("bundled connective lexicon is valid")
    }

    pub fn from_path(path: &std::path::Path) -> Result<MarkerLexicon> {
        MarkerLexicon::from_lines(&std::fs::read_to_string(path)?)
    }

    pub fn len(&self) -> usize {
        self.connectives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.connectives.is_empty()
    }

    pub fn connective(&self, i: usize) -> String {
        self.connectives[i].join(" ")
    }

    /// Display form with tokens joined by underscores ("even_though").
    pub fn connective_key(&self, i: usize) -> String {
        self.connectives[i].join("_")
    }

    pub fn is_frequent(&self, i: usize) -> bool {
        self.frequent[i]
    }

    /// Longest connective starting at `pos` in a token slice.
    fn match_at(&self, tokens: &[String], pos: usize) -> Option<(usize, usize)> {
        let ids = self.by_first.get(tokens[pos].as_str())?;
        for &i in ids {
            let conn = &self.connectives[i];
            if pos + conn.len() <= tokens.len()
                && tokens[pos..pos + conn.len()]
                    .iter()
                    .zip(conn)
                    .all(|(a, b)| a == b)
            {
                return Some((i, conn.len()));
            }
        }
        None
    }

    /// Count connective occurrences in one token sequence.
    pub fn count_in(&self, tokens: &[String], counts: &mut [u64]) -> u64 {
        let mut total = 0u64;
        let mut pos = 0usize;
        while pos < tokens.len() {
            match self.match_at(tokens, pos) {
                Some((i, len)) => {
                    counts[i] += 1;
                    total += 1;
                    pos += len;
                }
                None => pos += 1,
            }
        }
        total
    }
}

/// Connective counts over one corpus, with per-document totals retained.
#[derive(Debug, Clone)]
pub struct MarkerProfile {
    pub name: String,
    pub counts: Vec<u64>,
    pub total: u64,
    pub total_tokens: usize,
    pub per_doc: Vec<(String, u64)>,
}

impl MarkerProfile {
    /// Occurrences of connective `i` per 10,000 corpus tokens.
    pub fn rate_per_10k(&self, i: usize) -> f64 {
        if self.total_tokens == 0 {
            0.0
        } else {
            self.counts[i] as f64 / self.total_tokens as f64 * 10_000.0
        }
    }
}

/// Count every connective across a corpus. Matching never crosses a
/// sentence boundary.
pub fn count_markers(corpus: &Corpus, lexicon: &MarkerLexicon, name: &str) -> MarkerProfile {
    let mut counts = vec![0u64; lexicon.len()];
    let mut per_doc = Vec::with_capacity(corpus.len());
    let mut total = 0u64;
    for doc in corpus.documents() {
        let mut doc_total = 0u64;
        for sentence in doc.sentences() {
            doc_total += lexicon.count_in(sentence, &mut counts);
        }
        total += doc_total;
        per_doc.push((doc.id.clone(), doc_total));
    }
    MarkerProfile {
        name: name.to_string(),
        counts,
        total,
        total_tokens: corpus.total_tokens(),
        per_doc,
    }
}
