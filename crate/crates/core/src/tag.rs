//! A small lexicon-based part-of-speech tagger.
//!
//! Tagging is most-frequent-tag lookup in a bundled lexicon, then
//! morphological stripping (inflectional suffixes resolved against lexicon
//! stems), then surface suffix rules, then a noun default. It is a
//! deterministic heuristic, not a trained tagger: it exists so content-word
//! filtering and entity detection work without any external model.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::data;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PosTag {
    Noun,
    Verb,
    Adj,
    Adv,
    Pron,
    Det,
    Prep,
    Conj,
    Num,
    Intj,
    Punct,
}

impl PosTag {
    pub fn is_content(self) -> bool {
        matches!(self, PosTag::Noun | PosTag::Verb | PosTag::Adj)
    }

    fn parse(s: &str) -> Option<PosTag> {
        Some(match s {
            "noun" => PosTag::Noun,
            "verb" => PosTag::Verb,
            "adj" => PosTag::Adj,
            "adv" => PosTag::Adv,
            "pron" => PosTag::Pron,
            "det" => PosTag::Det,
            "prep" => PosTag::Prep,
            "conj" => PosTag::Conj,
            "num" => PosTag::Num,
            "intj" => PosTag::Intj,
            _ => return None,
        })
    }
}

#[derive(Debug)]
pub struct Tagger {
    lexicon: HashMap<String, PosTag>,
}

impl Tagger {
    pub fn from_tsv(text: &str) -> Tagger {
        let mut lexicon = HashMap::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            if let (Some(word), Some(tag)) = (parts.next(), parts.next()) {
                if let Some(tag) = PosTag::parse(tag.trim()) {
                    lexicon.insert(word.trim().to_lowercase(), tag);
                }
            }
        }
        Tagger { lexicon }
    }

    /// The bundled tagger, loaded once per process.
    pub fn bundled() -> &'static Tagger {
        static CELL: OnceLock<Tagger> = OnceLock::new();
        CELL.get_or_init(|| Tagger::from_tsv(data::TAGGER_LEXICON_RAW))
    }

    pub fn tag(&self, token: &str) -> PosTag {
        if token.is_empty() {
            return PosTag::Punct;
        }
        if token.chars().all(|c| !c.is_alphanumeric()) {
            return PosTag::Punct;
        }
        if is_numeric_token(token) {
            return PosTag::Num;
        }
        if let Some(&tag) = self.lexicon.get(token) {
            return tag;
        }
        if let Some(tag) = self.strip_inflection(token) {
            return tag;
        }
        suffix_rule(token).unwrap_or(PosTag::Noun)
    }

    /// Resolve regular inflections against lexicon stems: "barked" via
    /// "bark", "chased" via "chase", "running" via "run".
    fn strip_inflection(&self, token: &str) -> Option<PosTag> {
        let candidates = |stem: &str| -> Vec<String> {
            let mut v = vec![stem.to_string(), format!("{stem}e")];
            // undo consonant doubling ("runn" -> "run")
            let bytes = stem.as_bytes();
            if bytes.len() >= 2 && bytes[bytes.len() - 1] == bytes[bytes.len() - 2] {
                v.push(stem[..stem.len() - 1].to_string());
            }
            v
        };
        for suffix in ["ing", "ed", "es", "s", "d"] {
            if let Some(stem) = token.strip_suffix(suffix) {
                if stem.len() < 2 {
                    continue;
                }
                for cand in candidates(stem) {
                    if let Some(&tag) = self.lexicon.get(&cand) {
                        // plural nouns stay nouns, verb stems stay verbs
                        return Some(tag);
                    }
                }
            }
        }
        None
    }
}

fn is_numeric_token(token: &str) -> bool {
    let mut seen_digit = false;
    let mut seen_sep = 0usize;
    for c in token.chars() {
        if c.is_ascii_digit() {
            seen_digit = true;
        } else if c == '.' || c == ',' {
            seen_sep += 1;
        } else {
            return false;
        }
    }
    seen_digit && seen_sep <= 1
}

fn suffix_rule(token: &str) -> Option<PosTag> {
    if token.ends_with("ly") {
        return Some(PosTag::Adv);
    }
    if token.ends_with("ing") || token.ends_with("ed") {
        return Some(PosTag::Verb);
    }
    for s in ["tion", "sion", "ment", "ness", "ity", "ship", "hood", "er", "ers"] {
        if token.ends_with(s) {
            return Some(PosTag::Noun);
        }
    }
    for s in ["ous", "ful", "ive", "less", "ish", "able", "ible", "al"] {
        if token.ends_with(s) {
            return Some(PosTag::Adj);
        }
    }
    None
}
