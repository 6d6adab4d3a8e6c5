//! Multinomial Naive Bayes over binary feature presentation.
//!
//! Each active feature counts once per document (the feature vectors are
//! binary), so the event model is a multinomial over presence events.
//! Likelihoods are additively smoothed across the full vocabulary, which
//! makes them sum to exactly 1 per class.

use crate::error::{Error, Result};
use crate::features::FeatureVector;

use super::winnow::binary_labels;

#[derive(Debug, Clone)]
pub struct NaiveBayesModel {
    labels: [String; 2],
    log_prior: [f64; 2],
    log_like: [Vec<f64>; 2],
    smoothing: f64,
    vocab_size: usize,
}

impl NaiveBayesModel {
    pub fn labels(&self) -> &[String; 2] {
        &self.labels
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn log_prior(&self, class: usize) -> f64 {
        self.log_prior[class]
    }

    /// log P(feature | class).
    pub fn log_likelihood(&self, class: usize, feature: usize) -> f64 {
        self.log_like[class][feature]
    }

    /// Unnormalized log joint: log P(class) + sum of active feature
    /// log-likelihoods.
    pub fn log_joint(&self, class: usize, vector: &FeatureVector) -> f64 {
        self.log_prior[class]
            + vector
                .active()
                .iter()
                .map(|&f| self.log_like[class][f])
                .sum::<f64>()
    }

    /// Continuous positive-class score: the log posterior ratio
    /// log P(labels[0] | doc) - log P(labels[1] | doc).
    pub fn score(&self, vector: &FeatureVector) -> Result<f64> {
        self.check_indices(vector)?;
        Ok(self.log_joint(0, vector) - self.log_joint(1, vector))
    }

    pub fn predict(&self, vector: &FeatureVector) -> Result<(String, f64)> {
        let score = self.score(vector)?;
        let label = if score >= 0.0 {
            self.labels[0].clone()
        } else {
            self.labels[1].clone()
        };
        Ok((label, score))
    }

    fn check_indices(&self, vector: &FeatureVector) -> Result<()> {
        if let Some(&max) = vector.active().last() {
            if max >= self.vocab_size {
                return Err(Error::FeatureOutOfRange {
                    index: max,
                    vocab_size: self.vocab_size,
                });
            }
        }
        Ok(())
    }

    pub(crate) fn from_parts(
        labels: [String; 2],
        log_prior: [f64; 2],
        log_like: [Vec<f64>; 2],
        smoothing: f64,
    ) -> NaiveBayesModel {
        let vocab_size = log_like[0].len();
        NaiveBayesModel {
            labels,
            log_prior,
            log_like,
            smoothing,
            vocab_size,
        }
    }

    pub(crate) fn log_like_tables(&self) -> &[Vec<f64>; 2] {
        &self.log_like
    }

    pub(crate) fn log_priors(&self) -> &[f64; 2] {
        &self.log_prior
    }
}

/// Train a two-class model. P(f|c) = (count(f,c) + s) / (total(c) + s*V)
/// over binary presence events; the class prior is the document fraction.
pub fn train_nb(
    examples: &[(FeatureVector, String)],
    vocab_size: usize,
    smoothing: f64,
) -> Result<NaiveBayesModel> {
    if smoothing < 0.0 || !smoothing.is_finite() {
        return Err(Error::invalid("smoothing must be a finite value >= 0"));
    }
    let labels = binary_labels(examples)?;
    let mut counts: [Vec<u64>; 2] = [vec![0; vocab_size], vec![0; vocab_size]];
    let mut doc_counts = [0usize; 2];
    for (vector, label) in examples {
        let class = if *label == labels[0] { 0 } else { 1 };
        doc_counts[class] += 1;
        for &f in vector.active() {
            if f >= vocab_size {
                return Err(Error::FeatureOutOfRange {
                    index: f,
                    vocab_size,
                });
            }
            counts[class][f] += 1;
        }
    }
    let n = examples.len() as f64;
    let log_prior = [
        (doc_counts[0] as f64 / n).ln(),
        (doc_counts[1] as f64 / n).ln(),
    ];
    let log_like = [0, 1].map(|class: usize| {
        let total: u64 = counts[class].iter().sum();
        let denom = total as f64 + smoothing * vocab_size as f64;
        counts[class]
            .iter()
            .map(|&c| ((c as f64 + smoothing) / denom).ln())
            .collect::<Vec<f64>>()
    });
    Ok(NaiveBayesModel {
        labels,
        log_prior,
        log_like,
        smoothing,
        vocab_size,
    })
}
