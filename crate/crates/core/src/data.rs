//! Bundled data files: stopwords, the feature blocklist, the discourse
//! connective lexicon, and the part-of-speech lexicon.
//!
//! Everything here is compiled into the binary so runs never depend on
//! external resources. Each default can be overridden by loading the same
//! file format from disk.

use std::collections::BTreeSet;
use std::sync::OnceLock;

/// A set of lowercase words loaded from a one-word-per-line file.
#[derive(Debug, Clone, Default)]
pub struct WordList {
    words: BTreeSet<String>,
}

impl WordList {
    pub fn from_lines(text: &str) -> Self {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.to_lowercase())
            .collect();
        WordList { words }
    }

    pub fn from_path(path: &std::path::Path) -> std::io::Result<Self> {
        Ok(Self::from_lines(&std::fs::read_to_string(path)?))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(|s| s.as_str())
    }
}

static STOPWORDS_RAW: &str = include_str!("../data/stopwords_en.txt");
static BLOCKLIST_RAW: &str = include_str!("../data/blocklist.txt");
pub(crate) static CONNECTIVES_RAW: &str = include_str!("../data/connectives.txt");
pub(crate) static TAGGER_LEXICON_RAW: &str = include_str!("../data/tagger_lexicon.tsv");

/// Bundled English stopword list. Doubles as the function-word list for
/// stoplist-mode content filtering.
pub fn english_stopwords() -> &'static WordList {
    static CELL: OnceLock<WordList> = OnceLock::new();
    CELL.get_or_init(|| WordList::from_lines(STOPWORDS_RAW))
}

/// Raw contents of the default blocklist file (one word per line).
pub fn default_blocklist_text() -> &'static str {
    BLOCKLIST_RAW
}
