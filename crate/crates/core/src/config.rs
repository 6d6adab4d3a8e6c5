//! Experiment configuration: one TOML file drives the whole pipeline.
//!
//! Every pipeline parameter lives here with its standard default, so a
//! default run uses the full protocol (7,500 features, 10 folds, 50 topics,
//! 2,000 sampling iterations, 0.10 annotation threshold, 20 permutations,
//! C = 1.0, Winnow 1.05/0.95 with thresholds 2.5/0.5).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::classify::Algorithm;
use crate::error::{Error, Result};
use crate::topics::FilterMode;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Base seed for every stochastic step.
    pub seed: i64,
    /// Report output directory.
    pub out_dir: PathBuf,
    /// Label -> JSONL corpus path.
    pub corpora: BTreeMap<String, PathBuf>,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub classification: ClassificationConfig,
    #[serde(default)]
    pub topics: TopicsConfig,
    #[serde(default)]
    pub coherence: CoherenceConfig,

    /// Filled at load time; the sha256 of the raw config file.
    #[serde(skip)]
    pub config_hash: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    /// Minimum stopword ratio for a document to count as English.
    #[serde(default = "default_english_threshold")]
    pub english_threshold: f64,
    /// Per-author document cap; absent means uncapped.
    #[serde(default)]
    pub per_author_cap: Option<usize>,
    /// Per-label token budget; absent means no downsampling.
    #[serde(default)]
    pub token_budget: Option<usize>,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            english_threshold: default_english_threshold(),
            per_author_cap: None,
            token_budget: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassificationConfig {
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<String>,
    #[serde(default = "default_k_features")]
    pub k_features: usize,
    #[serde(default = "default_folds")]
    pub folds: usize,
    /// How many indicative features to report per class.
    #[serde(default = "default_top_features")]
    pub top_features: usize,
    /// Optional blocklist file; the bundled list when absent.
    #[serde(default)]
    pub blocklist: Option<PathBuf>,
    /// "corpus" (default) or "document" frequency for feature selection.
    #[serde(default = "default_frequency_mode")]
    pub frequency_mode: String,
}

impl Default for ClassificationConfig {
    fn default() -> Self {
        ClassificationConfig {
            algorithms: default_algorithms(),
            k_features: default_k_features(),
            folds: default_folds(),
            top_features: default_top_features(),
            blocklist: None,
            frequency_mode: default_frequency_mode(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopicsConfig {
    #[serde(default = "default_topic_count")]
    pub topics: usize,
    #[serde(default = "default_lda_iterations")]
    pub iterations: usize,
    /// Document-topic prior; 5.0 / topics when absent.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_annotation_threshold")]
    pub threshold: f64,
    #[serde(default = "default_filter_mode")]
    pub filter_mode: String,
    /// Documents sampled per label for the significance contrast.
    #[serde(default = "default_contrast_sample")]
    pub contrast_sample: usize,
    /// Words shown per topic in reports.
    #[serde(default = "default_top_words")]
    pub top_words: usize,
}

impl Default for TopicsConfig {
    fn default() -> Self {
        TopicsConfig {
            topics: default_topic_count(),
            iterations: default_lda_iterations(),
            alpha: None,
            beta: default_beta(),
            threshold: default_annotation_threshold(),
            filter_mode: default_filter_mode(),
            contrast_sample: default_contrast_sample(),
            top_words: default_top_words(),
        }
    }
}

impl TopicsConfig {
    pub fn effective_alpha(&self) -> f64 {
        self.alpha.unwrap_or(5.0 / self.topics.max(1) as f64)
    }

    pub fn mode(&self) -> Option<FilterMode> {
        FilterMode::parse(&self.filter_mode)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoherenceConfig {
    /// Optional connective lexicon path; bundled 60-entry lexicon when
    /// absent.
    #[serde(default)]
    pub lexicon: Option<PathBuf>,
    #[serde(default = "default_history")]
    pub history: usize,
    #[serde(default = "default_smoothing")]
    pub smoothing: f64,
    #[serde(default = "default_permutations")]
    pub permutations: usize,
    /// "counterpart" trains the grid model on the other label's sample;
    /// "self" trains on the sample under test.
    #[serde(default = "default_egrid_train")]
    pub egrid_train: String,
}

impl Default for CoherenceConfig {
    fn default() -> Self {
        CoherenceConfig {
            lexicon: None,
            history: default_history(),
            smoothing: default_smoothing(),
            permutations: default_permutations(),
            egrid_train: default_egrid_train(),
        }
    }
}

fn default_english_threshold() -> f64 {
    0.15
}
fn default_algorithms() -> Vec<String> {
    vec!["winnow".into(), "naive_bayes".into(), "svm".into()]
}
fn default_k_features() -> usize {
    7500
}
fn default_folds() -> usize {
    10
}
fn default_top_features() -> usize {
    30
}
fn default_frequency_mode() -> String {
    "corpus".into()
}
fn default_topic_count() -> usize {
    50
}
fn default_lda_iterations() -> usize {
    2000
}
fn default_beta() -> f64 {
    0.01
}
fn default_annotation_threshold() -> f64 {
    0.10
}
fn default_filter_mode() -> String {
    "stoplist".into()
}
fn default_contrast_sample() -> usize {
    2000
}
fn default_top_words() -> usize {
    10
}
fn default_history() -> usize {
    2
}
fn default_smoothing() -> f64 {
    1.0
}
fn default_permutations() -> usize {
    20
}
fn default_egrid_train() -> String {
    "counterpart".into()
}

impl ExperimentConfig {
    /// Parse a TOML config file; the raw bytes are hashed into
    /// `config_hash` for report headers.
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let raw = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(vec![format!("cannot read config {}: {e}", path.display())])
        })?;
        Self::from_toml(&raw, Some(path))
    }

    pub fn from_toml(raw: &str, base: Option<&Path>) -> Result<ExperimentConfig> {
        let mut config: ExperimentConfig = toml::from_str(raw)
            .map_err(|e| Error::Config(vec![format!("config parse error: {e}")]))?;
        let mut hasher = Sha256::new();
        hasher.update(raw.as_bytes());
        config.config_hash = hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        // paths are relative to the config file's directory
        if let Some(dir) = base.and_then(Path::parent) {
            let rebase = |p: &PathBuf| -> PathBuf {
                if p.is_absolute() {
                    p.clone()
                } else {
                    dir.join(p)
                }
            };
            config.corpora = config
                .corpora
                .iter()
                .map(|(k, v)| (k.clone(), rebase(v)))
                .collect();
            if let Some(p) = &config.classification.blocklist {
                config.classification.blocklist = Some(rebase(p));
            }
            if let Some(p) = &config.coherence.lexicon {
                config.coherence.lexicon = Some(rebase(p));
            }
            if config.out_dir.is_relative() {
                config.out_dir = dir.join(&config.out_dir);
            }
        }
        Ok(config)
    }

    pub fn seed_u64(&self) -> u64 {
        self.seed.max(0) as u64
    }

    pub fn algorithms(&self) -> Result<Vec<Algorithm>> {
        self.classification
            .algorithms
            .iter()
            .map(|name| {
                Algorithm::parse(name)
                    .ok_or_else(|| Error::invalid(format!("unknown algorithm {name:?}")))
            })
            .collect()
    }

    /// Collect every configuration violation; an empty list means a full
    /// run cannot fail on configuration alone.
    pub fn validate(&self) -> Vec<String> {
        let mut violations = Vec::new();
        if self.seed < 0 {
            violations.push(format!("seed must be non-negative, got {}", self.seed));
        }
        if self.corpora.is_empty() {
            violations.push("no corpora configured".into());
        }
        if self.corpora.len() != 2 {
            violations.push(format!(
                "classification, contrast, and grid stages need exactly 2 labels, got {}",
                self.corpora.len()
            ));
        }
        let mut authors = std::collections::BTreeSet::new();
        for (label, path) in &self.corpora {
            if label.trim().is_empty() {
                violations.push("corpus labels must be non-empty".into());
            }
            if !path.exists() {
                violations.push(format!(
                    "corpus file for label {label:?} does not exist: {}",
                    path.display()
                ));
                continue;
            }
            match std::fs::File::open(path) {
                Ok(f) => match crate::corpus::ingest_jsonl(std::io::BufReader::new(f)) {
                    Ok(outcome) => {
                        if outcome.corpus.is_empty() {
                            violations.push(format!(
                                "corpus for label {label:?} has no usable documents"
                            ));
                        }
                        for d in outcome.corpus.documents() {
                            authors.insert(d.author_id.clone());
                        }
                    }
                    Err(e) => violations.push(format!(
                        "corpus for label {label:?} is unreadable: {e}"
                    )),
                },
                Err(e) => violations.push(format!(
                    "cannot open corpus for label {label:?}: {e}"
                )),
            }
        }

        let s = &self.sampling;
        if !(0.0..=1.0).contains(&s.english_threshold) {
            violations.push(format!(
                "sampling.english_threshold must be in [0, 1], got {}",
                s.english_threshold
            ));
        }
        if s.per_author_cap == Some(0) {
            violations.push("sampling.per_author_cap must be at least 1".into());
        }
        if s.token_budget == Some(0) {
            violations.push("sampling.token_budget must be at least 1".into());
        }

        let c = &self.classification;
        if c.algorithms.is_empty() {
            violations.push("classification.algorithms must not be empty".into());
        }
        for name in &c.algorithms {
            if Algorithm::parse(name).is_none() {
                violations.push(format!("unknown classification algorithm {name:?}"));
            }
        }
        if c.k_features < 1 {
            violations.push("classification.k_features must be at least 1".into());
        }
        if c.folds < 2 {
            violations.push("classification.folds must be at least 2".into());
        }
        if !authors.is_empty() && authors.len() < c.folds {
            violations.push(format!(
                "classification.folds = {} exceeds the {} distinct authors; \
                 author-grouped folds need at least as many authors as folds",
                c.folds,
                authors.len()
            ));
        }
        if !matches!(c.frequency_mode.as_str(), "corpus" | "document") {
            violations.push(format!(
                "classification.frequency_mode must be \"corpus\" or \"document\", got {:?}",
                c.frequency_mode
            ));
        }
        if let Some(p) = &c.blocklist {
            if !p.exists() {
                violations.push(format!("blocklist file does not exist: {}", p.display()));
            }
        }

        let t = &self.topics;
        if t.topics < 1 {
            violations.push("topics.topics must be at least 1".into());
        }
        if t.iterations < 1 {
            violations.push("topics.iterations must be at least 1".into());
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(t.effective_alpha()) {
            violations.push("topics.alpha must be positive".into());
        }
        if !positive(t.beta) {
            violations.push("topics.beta must be positive".into());
        }
        if !positive(t.threshold) || t.threshold > 1.0 {
            violations.push(format!(
                "topics.threshold must be in (0, 1], got {}",
                t.threshold
            ));
        }
        if t.mode().is_none() {
            violations.push(format!(
                "topics.filter_mode must be \"stoplist\" or \"pos\", got {:?}",
                t.filter_mode
            ));
        }
        if t.contrast_sample < 1 {
            violations.push("topics.contrast_sample must be at least 1".into());
        }

        let h = &self.coherence;
        if h.history < 1 {
            violations.push("coherence.history must be at least 1".into());
        }
        if h.smoothing < 0.0 {
            violations.push("coherence.smoothing must be >= 0".into());
        }
        if h.permutations < 1 {
            violations.push("coherence.permutations must be at least 1".into());
        }
        if !matches!(h.egrid_train.as_str(), "counterpart" | "self") {
            violations.push(format!(
                "coherence.egrid_train must be \"counterpart\" or \"self\", got {:?}",
                h.egrid_train
            ));
        }
        if let Some(p) = &h.lexicon {
            if !p.exists() {
                violations.push(format!("lexicon file does not exist: {}", p.display()));
            }
        }

        violations
    }
}
