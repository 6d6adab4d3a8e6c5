//! Latent Dirichlet Allocation fit by collapsed Gibbs sampling.
//!
//! A single chain resamples every token's topic per sweep from
//! p(t) ∝ (n_dt + alpha) * (n_tw + beta) / (n_t + V*beta)
//! with the token's own assignment removed from the counts. Theta and phi
//! are point estimates from the final sample. Runs are deterministic per
//! seed down to the individual assignments.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, uniform_f64, RngCore, SeededRng};

use super::{ContentCorpus, FilterMode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdaParams {
    pub topics: usize,
    pub iterations: usize,
    /// Symmetric document-topic prior.
    pub alpha: f64,
    /// Symmetric topic-word prior.
    pub beta: f64,
    pub seed: u64,
}

impl LdaParams {
    /// Defaults for a topic count: alpha = 5.0 / T, beta = 0.01.
    pub fn for_topics(topics: usize, seed: u64) -> LdaParams {
        LdaParams {
            topics,
            iterations: 2000,
            alpha: 5.0 / topics.max(1) as f64,
            beta: 0.01,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.topics < 1 {
            return Err(Error::invalid("topic count must be at least 1"));
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.alpha) || !positive(self.beta) {
            return Err(Error::invalid("alpha and beta must be positive"));
        }
        Ok(())
    }
}

impl Default for LdaParams {
    fn default() -> Self {
        LdaParams::for_topics(50, 0)
    }
}

/// The collapsed Gibbs chain. Exposed so callers can drive sweeps and
/// inspect count-table consistency between them.
pub struct GibbsSampler {
    corpus: ContentCorpus,
    params: LdaParams,
    rng: SeededRng,
    assignments: Vec<Vec<u32>>,
    doc_topic: Vec<Vec<u32>>,
    topic_word: Vec<Vec<u32>>,
    topic_total: Vec<u64>,
    sweeps_done: usize,
    weight_buf: Vec<f64>,
}

impl GibbsSampler {
    pub fn new(corpus: ContentCorpus, params: LdaParams) -> Result<GibbsSampler> {
        params.validate()?;
        if corpus.is_empty() {
            return Err(Error::empty("cannot fit topics on an empty corpus"));
        }
        let t = params.topics;
        let v = corpus.vocab_size();
        let mut rng = rng_from_seed(params.seed);
        let mut doc_topic = vec![vec![0u32; t]; corpus.len()];
        let mut topic_word = vec![vec![0u32; v]; t];
        let mut topic_total = vec![0u64; t];
        let mut assignments = Vec::with_capacity(corpus.len());
        for (d, doc) in corpus.docs().iter().enumerate() {
            let mut z = Vec::with_capacity(doc.len());
            for &w in doc {
                let topic = (rng.next_u64() % t as u64) as u32;
                z.push(topic);
                doc_topic[d][topic as usize] += 1;
                topic_word[topic as usize][w as usize] += 1;
                topic_total[topic as usize] += 1;
            }
            assignments.push(z);
        }
        Ok(GibbsSampler {
            corpus,
            params,
            rng,
            assignments,
            doc_topic,
            topic_word,
            topic_total,
            sweeps_done: 0,
            weight_buf: vec![0.0; t],
        })
    }

    pub fn sweeps_done(&self) -> usize {
        self.sweeps_done
    }

    /// One full pass: resample every token position in corpus order.
    pub fn sweep(&mut self) {
        let t = self.params.topics;
        let v = self.corpus.vocab_size() as f64;
        let alpha = self.params.alpha;
        let beta = self.params.beta;
        for d in 0..self.corpus.len() {
            for i in 0..self.corpus.docs()[d].len() {
                let w = self.corpus.docs()[d][i] as usize;
                let old = self.assignments[d][i] as usize;
                self.doc_topic[d][old] -= 1;
                self.topic_word[old][w] -= 1;
                self.topic_total[old] -= 1;

                let mut total = 0.0;
                for topic in 0..t {
                    let weight = (self.doc_topic[d][topic] as f64 + alpha)
                        * (self.topic_word[topic][w] as f64 + beta)
                        / (self.topic_total[topic] as f64 + v * beta);
                    total += weight;
                    self.weight_buf[topic] = total; // cumulative
                }
                let draw = uniform_f64(&mut self.rng) * total;
                let new = self
                    .weight_buf
                    .iter()
                    .position(|&cum| draw < cum)
                    .unwrap_or(t - 1);

                self.assignments[d][i] = new as u32;
                self.doc_topic[d][new] += 1;
                self.topic_word[new][w] += 1;
                self.topic_total[new] += 1;
            }
        }
        self.sweeps_done += 1;
    }

    /// Recompute every count table from the raw assignments and compare;
    /// the tables must be an exact aggregation at all times.
    pub fn check_consistency(&self) -> bool {
        let t = self.params.topics;
        let v = self.corpus.vocab_size();
        let mut doc_topic = vec![vec![0u32; t]; self.corpus.len()];
        let mut topic_word = vec![vec![0u32; v]; t];
        let mut topic_total = vec![0u64; t];
        for (d, doc) in self.corpus.docs().iter().enumerate() {
            for (i, &w) in doc.iter().enumerate() {
                let z = self.assignments[d][i] as usize;
                doc_topic[d][z] += 1;
                topic_word[z][w as usize] += 1;
                topic_total[z] += 1;
            }
        }
        doc_topic == self.doc_topic
            && topic_word == self.topic_word
            && topic_total == self.topic_total
    }

    pub fn into_model(self) -> TopicModel {
        TopicModel {
            corpus: self.corpus,
            params: self.params,
            assignments: self.assignments,
            doc_topic: self.doc_topic,
            topic_word: self.topic_word,
            topic_total: self.topic_total,
            iterations_run: self.sweeps_done,
        }
    }
}

/// A fitted model: the final sample plus everything needed to re-annotate.
#[derive(Debug, Clone)]
pub struct TopicModel {
    corpus: ContentCorpus,
    params: LdaParams,
    assignments: Vec<Vec<u32>>,
    doc_topic: Vec<Vec<u32>>,
    topic_word: Vec<Vec<u32>>,
    topic_total: Vec<u64>,
    iterations_run: usize,
}

/// Topics covering at least `threshold` of a document.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicAnnotation {
    pub doc_id: String,
    pub topics: Vec<usize>,
    pub threshold: f64,
}

impl TopicModel {
    pub fn topic_count(&self) -> usize {
        self.params.topics
    }

    pub fn params(&self) -> &LdaParams {
        &self.params
    }

    pub fn iterations_run(&self) -> usize {
        self.iterations_run
    }

    pub fn corpus(&self) -> &ContentCorpus {
        &self.corpus
    }

    pub fn vocab(&self) -> &[String] {
        self.corpus.vocab()
    }

    pub fn doc_ids(&self) -> &[String] {
        self.corpus.doc_ids()
    }

    pub fn assignments(&self) -> &[Vec<u32>] {
        &self.assignments
    }

    /// Document-topic distribution, (n_dt + alpha) / (len + T*alpha).
    /// Documents with no content tokens come out uniform.
    pub fn theta(&self, d: usize) -> Vec<f64> {
        let t = self.params.topics;
        let len = self.corpus.docs()[d].len() as f64;
        let denom = len + t as f64 * self.params.alpha;
        (0..t)
            .map(|topic| (self.doc_topic[d][topic] as f64 + self.params.alpha) / denom)
            .collect()
    }

    /// Topic-word distribution, (n_tw + beta) / (n_t + V*beta).
    pub fn phi(&self, topic: usize) -> Vec<f64> {
        let v = self.corpus.vocab_size() as f64;
        let denom = self.topic_total[topic] as f64 + v * self.params.beta;
        self.topic_word[topic]
            .iter()
            .map(|&c| (c as f64 + self.params.beta) / denom)
            .collect()
    }

    /// The n highest-probability words of a topic; ties break
    /// lexicographically.
    pub fn top_words(&self, topic: usize, n: usize) -> Vec<(String, f64)> {
        let phi = self.phi(topic);
        let mut ranked: Vec<(usize, f64)> = phi.into_iter().enumerate().collect();
        ranked.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("phi is finite")
                .then_with(|| self.corpus.vocab()[a.0].cmp(&self.corpus.vocab()[b.0]))
        });
        ranked.truncate(n);
        ranked
            .into_iter()
            .map(|(w, p)| (self.corpus.vocab()[w].clone(), p))
            .collect()
    }

    /// Annotate one document (by position) with its covering topics.
    pub fn annotate_doc(&self, d: usize, threshold: f64) -> TopicAnnotation {
        let theta = self.theta(d);
        let topics: Vec<usize> = theta
            .iter()
            .enumerate()
            .filter(|(_, &p)| p >= threshold)
            .map(|(t, _)| t)
            .collect();
        TopicAnnotation {
            doc_id: self.corpus.doc_ids()[d].clone(),
            topics,
            threshold,
        }
    }

    /// Annotate every document.
    pub fn annotate(&self, threshold: f64) -> Vec<TopicAnnotation> {
        (0..self.corpus.len())
            .map(|d| self.annotate_doc(d, threshold))
            .collect()
    }

    pub fn annotation_for(&self, doc_id: &str, threshold: f64) -> Result<TopicAnnotation> {
        let d = self
            .corpus
            .doc_ids()
            .iter()
            .position(|id| id == doc_id)
            .ok_or_else(|| Error::UnknownDocument(doc_id.to_string()))?;
        Ok(self.annotate_doc(d, threshold))
    }
}

/// Fit by running `iterations` sweeps. Documents with zero content tokens
/// take no part in sampling (they have no positions) and keep a uniform
/// theta; their count is reported via the log.
pub fn fit_lda(corpus: ContentCorpus, params: LdaParams) -> Result<TopicModel> {
    let empty = corpus.empty_doc_count();
    if empty > 0 {
        log::info!("{empty} documents have no content tokens; they keep a uniform theta");
    }
    let mut sampler = GibbsSampler::new(corpus, params)?;
    for _ in 0..params.iterations {
        sampler.sweep();
    }
    Ok(sampler.into_model())
}

const LDA_MAGIC: &str = "storyscope-lda 1";

/// Dump the full model state (priors, vocabulary, assignments) as text.
pub fn save_topic_model(model: &TopicModel, mut w: impl Write) -> Result<()> {
    writeln!(w, "{LDA_MAGIC}")?;
    writeln!(w, "topics={}", model.params.topics)?;
    writeln!(w, "iterations={}", model.params.iterations)?;
    writeln!(w, "iterations_run={}", model.iterations_run)?;
    writeln!(w, "alpha={}", model.params.alpha)?;
    writeln!(w, "beta={}", model.params.beta)?;
    writeln!(w, "seed={}", model.params.seed)?;
    writeln!(w, "filter_mode={}", model.corpus.mode().name())?;
    writeln!(w, "vocab_size={}", model.corpus.vocab_size())?;
    writeln!(w, "doc_count={}", model.corpus.len())?;
    writeln!(w, "vocab")?;
    for word in model.corpus.vocab() {
        writeln!(w, "{word}")?;
    }
    writeln!(w, "docs")?;
    for (d, id) in model.corpus.doc_ids().iter().enumerate() {
        let pairs: Vec<String> = model.corpus.docs()[d]
            .iter()
            .zip(&model.assignments[d])
            .map(|(w, z)| format!("{w}:{z}"))
            .collect();
        writeln!(w, "{id}\t{}", pairs.join(" "))?;
    }
    Ok(())
}

/// Reload a dumped model; count tables are rebuilt from the assignments.
pub fn load_topic_model(r: impl BufRead) -> Result<TopicModel> {
    let mut lines = r.lines();
    let mut next = || -> Result<String> {
        lines
            .next()
            .ok_or_else(|| Error::ModelFormat("unexpected end of file".into()))?
            .map_err(Error::from)
    };
    if next()? != LDA_MAGIC {
        return Err(Error::ModelFormat(format!("expected {LDA_MAGIC:?} header")));
    }
    let mut header: HashMap<String, String> = HashMap::new();
    loop {
        let line = next()?;
        if line == "vocab" {
            break;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::ModelFormat(format!("bad header line {line:?}")))?;
        header.insert(k.to_string(), v.to_string());
    }
    let get = |name: &str| -> Result<String> {
        header
            .get(name)
            .cloned()
            .ok_or_else(|| Error::ModelFormat(format!("missing header field {name}")))
    };
    let parse_usize = |s: String| -> Result<usize> {
        s.parse()
            .map_err(|_| Error::ModelFormat("expected an integer".into()))
    };
    let parse_f64 = |s: String| -> Result<f64> {
        s.parse()
            .map_err(|_| Error::ModelFormat("expected a number".into()))
    };
    let topics = parse_usize(get("topics")?)?;
    let params = LdaParams {
        topics,
        iterations: parse_usize(get("iterations")?)?,
        alpha: parse_f64(get("alpha")?)?,
        beta: parse_f64(get("beta")?)?,
        seed: parse_usize(get("seed")?)? as u64,
    };
    let iterations_run = parse_usize(get("iterations_run")?)?;
    let mode = FilterMode::parse(&get("filter_mode")?)
        .ok_or_else(|| Error::ModelFormat("unknown filter mode".into()))?;
    let vocab_size = parse_usize(get("vocab_size")?)?;
    let doc_count = parse_usize(get("doc_count")?)?;

    let mut vocab = Vec::with_capacity(vocab_size);
    for _ in 0..vocab_size {
        vocab.push(next()?);
    }
    if next()? != "docs" {
        return Err(Error::ModelFormat("expected docs section".into()));
    }
    let mut doc_ids = Vec::with_capacity(doc_count);
    let mut docs = Vec::with_capacity(doc_count);
    let mut assignments = Vec::with_capacity(doc_count);
    for _ in 0..doc_count {
        let line = next()?;
        let (id, rest) = line
            .split_once('\t')
            .ok_or_else(|| Error::ModelFormat(format!("bad doc line {line:?}")))?;
        let mut words = Vec::new();
        let mut z = Vec::new();
        for pair in rest.split(' ').filter(|p| !p.is_empty()) {
            let (w, t) = pair
                .split_once(':')
                .ok_or_else(|| Error::ModelFormat(format!("bad token pair {pair:?}")))?;
            let w: u32 = w
                .parse()
                .map_err(|_| Error::ModelFormat("bad word id".into()))?;
            let t: u32 = t
                .parse()
                .map_err(|_| Error::ModelFormat("bad topic id".into()))?;
            if t as usize >= topics {
                return Err(Error::ModelFormat("topic id out of range".into()));
            }
            words.push(w);
            z.push(t);
        }
        doc_ids.push(id.to_string());
        docs.push(words);
        assignments.push(z);
    }
    let corpus = ContentCorpus::from_parts(doc_ids, docs, vocab, mode)?;

    let mut doc_topic = vec![vec![0u32; topics]; corpus.len()];
    let mut topic_word = vec![vec![0u32; corpus.vocab_size()]; topics];
    let mut topic_total = vec![0u64; topics];
    for (d, doc) in corpus.docs().iter().enumerate() {
        for (i, &w) in doc.iter().enumerate() {
            let z = assignments[d][i] as usize;
            doc_topic[d][z] += 1;
            topic_word[z][w as usize] += 1;
            topic_total[z] += 1;
        }
    }
    Ok(TopicModel {
        corpus,
        params,
        assignments,
        doc_topic,
        topic_word,
        topic_total,
        iterations_run,
    })
}
