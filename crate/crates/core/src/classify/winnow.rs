//! Balanced Winnow: a mistake-driven linear classifier with paired
//! multiplicative weights per feature and thick training thresholds.
//!
//! Scores are normalized by the number of active features, so the
//! thresholds are scale-independent. Weights initialize lazily to
//! w+ = 2.0, w- = 1.0 the first time a feature is active in training,
//! giving every feature an initial net weight of 1.0. Absolute weights
//! depend on those internals; the contract is the induced ranking and the
//! update rule itself.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::features::FeatureVector;

pub const INIT_W_PLUS: f64 = 2.0;
pub const INIT_W_MINUS: f64 = 1.0;

/// Update factors and thresholds. With the defaults alpha * beta =
/// 0.9975, deliberately not 1: a feature that gets promoted and demoted
/// equally often decays slightly instead of standing still.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WinnowParams {
    /// Promotion factor, > 1.
    pub alpha: f64,
    /// Demotion factor, in (0, 1).
    pub beta: f64,
    /// Major threshold: a document of the class with a score below this
    /// triggers promotion.
    pub theta_plus: f64,
    /// Minor threshold: a document outside the class with a score above
    /// this triggers demotion.
    pub theta_minus: f64,
    /// Training passes over the data.
    pub iterations: usize,
}

impl Default for WinnowParams {
    fn default() -> Self {
        WinnowParams {
            alpha: 1.05,
            beta: 0.95,
            theta_plus: 2.5,
            theta_minus: 0.5,
            iterations: 1,
        }
    }
}

impl WinnowParams {
    fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || self.alpha <= 1.0 {
            return Err(Error::invalid("winnow alpha must be > 1"));
        }
        if !self.beta.is_finite() || self.beta <= 0.0 || self.beta >= 1.0 {
            return Err(Error::invalid("winnow beta must be in (0, 1)"));
        }
        if self.iterations < 1 {
            return Err(Error::invalid("winnow iterations must be >= 1"));
        }
        Ok(())
    }
}

/// One Balanced Winnow weight table per class. `labels` is sorted
/// lexicographically; index 0 is the positive class for scoring.
#[derive(Debug, Clone)]
pub struct WinnowModel {
    labels: [String; 2],
    weights: [HashMap<usize, (f64, f64)>; 2],
    params: WinnowParams,
    vocab_size: usize,
}

impl WinnowModel {
    pub fn labels(&self) -> &[String; 2] {
        &self.labels
    }

    pub fn params(&self) -> &WinnowParams {
        &self.params
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    /// Weight pair for a feature under a class, if the feature was ever
    /// active during training.
    pub fn weight(&self, class: usize, feature: usize) -> Option<(f64, f64)> {
        self.weights[class].get(&feature).copied()
    }

    /// Net weights (w+ - w-) of every touched feature for a class.
    pub fn net_weights(&self, class: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights[class].iter().map(|(&f, &(p, m))| (f, p - m))
    }

    /// Normalized class score: mean net weight over the active features.
    /// Features never touched in training contribute 0. Empty vectors
    /// score 0.
    pub fn class_score(&self, class: usize, vector: &FeatureVector) -> f64 {
        if vector.is_empty() {
            return 0.0;
        }
        let sum: f64 = vector
            .active()
            .iter()
            .filter_map(|f| self.weights[class].get(f))
            .map(|&(p, m)| p - m)
            .sum();
        sum / vector.len() as f64
    }

    /// Continuous positive-class score: score(labels[0]) - score(labels[1]).
    pub fn score(&self, vector: &FeatureVector) -> Result<f64> {
        self.check_indices(vector)?;
        Ok(self.class_score(0, vector) - self.class_score(1, vector))
    }

    /// Predicted label and continuous score; ties go to the
    /// lexicographically smaller label.
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

    /// Internal constructor shared with model deserialization.
    pub(crate) fn from_parts(
        labels: [String; 2],
        weights: [HashMap<usize, (f64, f64)>; 2],
        params: WinnowParams,
        vocab_size: usize,
    ) -> WinnowModel {
        WinnowModel {
            labels,
            weights,
            params,
            vocab_size,
        }
    }

    pub(crate) fn weight_table(&self, class: usize) -> &HashMap<usize, (f64, f64)> {
        &self.weights[class]
    }
}

/// Extract the sorted pair of labels from a training set; errors unless
/// exactly two distinct labels occur.
pub(crate) fn binary_labels(examples: &[(FeatureVector, String)]) -> Result<[String; 2]> {
    let mut labels: Vec<String> = examples.iter().map(|(_, l)| l.clone()).collect();
    labels.sort();
    labels.dedup();
    if labels.len() != 2 {
        return Err(Error::NotBinary { found: labels });
    }
    let mut it = labels.into_iter();
    Ok([it.next().unwrap(), it.next().unwrap()])
}

/// Train one Balanced Winnow per class in a single pass (by default) over
/// the examples in input order.
///
/// For each document and class: initialize weights of newly seen active
/// features, compute the normalized score, then promote (document in
/// class, score below theta_plus: w+ *= alpha, w- *= beta) or demote
/// (document outside class, score above theta_minus: w+ *= beta,
/// w- *= alpha) every active feature.
pub fn train_winnow(
    examples: &[(FeatureVector, String)],
    vocab_size: usize,
    params: WinnowParams,
) -> Result<WinnowModel> {
    params.validate()?;
    let labels = binary_labels(examples)?;
    let mut weights: [HashMap<usize, (f64, f64)>; 2] = [HashMap::new(), HashMap::new()];

    for _ in 0..params.iterations {
        for (vector, label) in examples {
            if let Some(&max) = vector.active().last() {
                if max >= vocab_size {
                    return Err(Error::FeatureOutOfRange {
                        index: max,
                        vocab_size,
                    });
                }
            }
            for class in 0..2 {
                let table = &mut weights[class];
                for &f in vector.active() {
                    table.entry(f).or_insert((INIT_W_PLUS, INIT_W_MINUS));
                }
                let score = if vector.is_empty() {
                    0.0
                } else {
                    vector
                        .active()
                        .iter()
                        .map(|f| {
                            let &(p, m) = table.get(f).expect("initialized above");
                            p - m
                        })
                        .sum::<f64>()
                        / vector.len() as f64
                };
                let belongs = *label == labels[class];
                if belongs && score < params.theta_plus {
                    for f in vector.active() {
                        let w = table.get_mut(f).expect("initialized above");
                        w.0 *= params.alpha;
                        w.1 *= params.beta;
                    }
                } else if !belongs && score > params.theta_minus {
                    for f in vector.active() {
                        let w = table.get_mut(f).expect("initialized above");
                        w.0 *= params.beta;
                        w.1 *= params.alpha;
                    }
                }
            }
        }
    }

    Ok(WinnowModel {
        labels,
        weights,
        params,
        vocab_size,
    })
}
