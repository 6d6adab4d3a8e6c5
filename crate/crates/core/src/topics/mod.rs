//! Topic modeling over content-filtered documents, with significance-tested
//! topic contrasts between sub-samples.

mod gtest;
mod lda;

pub use gtest::{contrast_samples, g_test, ContrastResult, Direction, GTestResult, G_THRESHOLD};
pub use lda::{
    fit_lda, load_topic_model, save_topic_model, GibbsSampler, LdaParams, TopicAnnotation,
    TopicModel,
};

use std::collections::HashMap;

use crate::corpus::{Corpus, Document};
use crate::data::english_stopwords;
use crate::error::{Error, Result};
use crate::tag::Tagger;

/// How content words are selected before topic modeling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FilterMode {
    /// Drop function words (bundled stopword list) and punctuation.
    #[default]
    Stoplist,
    /// Keep only tokens the bundled tagger marks as nouns, verbs, or
    /// adjectives.
    Pos,
}

impl FilterMode {
    pub fn name(self) -> &'static str {
        match self {
            FilterMode::Stoplist => "stoplist",
            FilterMode::Pos => "pos",
        }
    }

    pub fn parse(s: &str) -> Option<FilterMode> {
        Some(match s {
            "stoplist" => FilterMode::Stoplist,
            "pos" => FilterMode::Pos,
            _ => return None,
        })
    }
}

/// Lowercased content tokens of a document; punctuation never survives.
pub fn content_filter(doc: &Document, mode: FilterMode) -> Vec<String> {
    let tagger = Tagger::bundled();
    let stopwords = english_stopwords();
    doc.tokens()
        .filter(|tok| match mode {
            FilterMode::Stoplist => {
                !stopwords.contains(tok) && tok.chars().any(char::is_alphanumeric)
            }
            FilterMode::Pos => tagger.tag(tok).is_content(),
        })
        .map(str::to_string)
        .collect()
}

/// A corpus reduced to content-word id sequences over a dense vocabulary.
/// Documents that lose every token keep an empty sequence, so annotation
/// stays total over the corpus.
#[derive(Debug, Clone)]
pub struct ContentCorpus {
    doc_ids: Vec<String>,
    docs: Vec<Vec<u32>>,
    vocab: Vec<String>,
    mode: FilterMode,
}

impl ContentCorpus {
    pub fn build(corpus: &Corpus, mode: FilterMode) -> ContentCorpus {
        let mut vocab: Vec<String> = Vec::new();
        let mut index: HashMap<String, u32> = HashMap::new();
        let mut docs = Vec::with_capacity(corpus.len());
        let mut doc_ids = Vec::with_capacity(corpus.len());
        for doc in corpus.documents() {
            let tokens = content_filter(doc, mode);
            let ids = tokens
                .into_iter()
                .map(|tok| {
                    *index.entry(tok.clone()).or_insert_with(|| {
                        vocab.push(tok);
                        (vocab.len() - 1) as u32
                    })
                })
                .collect();
            docs.push(ids);
            doc_ids.push(doc.id.clone());
        }
        ContentCorpus {
            doc_ids,
            docs,
            vocab,
            mode,
        }
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn docs(&self) -> &[Vec<u32>] {
        &self.docs
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn mode(&self) -> FilterMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn empty_doc_count(&self) -> usize {
        self.docs.iter().filter(|d| d.is_empty()).count()
    }

    /// Assemble directly from parts (model reload and tests).
    pub fn from_parts(
        doc_ids: Vec<String>,
        docs: Vec<Vec<u32>>,
        vocab: Vec<String>,
        mode: FilterMode,
    ) -> Result<ContentCorpus> {
        if doc_ids.len() != docs.len() {
            return Err(Error::invalid("doc_ids and docs must have equal length"));
        }
        let v = vocab.len() as u32;
        if docs.iter().flatten().any(|&w| w >= v) {
            return Err(Error::invalid("word id outside vocabulary"));
        }
        Ok(ContentCorpus {
            doc_ids,
            docs,
            vocab,
            mode,
        })
    }
}
