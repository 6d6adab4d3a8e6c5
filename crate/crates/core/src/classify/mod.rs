//! Supervised genre classification: three classifiers, author-grouped
//! cross-validation, micro-averaged metrics, and Winnow introspection.
//!
//! The task is binary by construction. Throughout this module the positive
//! class is the lexicographically smaller of the two labels; report headers
//! record it.

pub mod model_io;
mod nb;
mod svm;
mod winnow;

pub use nb::{train_nb, NaiveBayesModel};
pub use svm::{primal_objective, train_svm, train_svm_traced, SvmModel, SvmParams};
pub use winnow::{train_winnow, WinnowModel, WinnowParams, INIT_W_MINUS, INIT_W_PLUS};

use std::collections::BTreeMap;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::features::{select_top_k, vectorize, Blocklist, FeatureVector, FrequencyMode, Vocabulary};
use crate::rng::{rng_from_seed, shuffle};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Winnow,
    NaiveBayes,
    Svm,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Winnow => "winnow",
            Algorithm::NaiveBayes => "naive_bayes",
            Algorithm::Svm => "svm",
        }
    }

    pub fn parse(s: &str) -> Option<Algorithm> {
        Some(match s {
            "winnow" => Algorithm::Winnow,
            "naive_bayes" | "nb" => Algorithm::NaiveBayes,
            "svm" => Algorithm::Svm,
            _ => return None,
        })
    }
}

/// A trained classifier behind one prediction surface.
#[derive(Debug, Clone)]
pub enum TrainedModel {
    Winnow(WinnowModel),
    NaiveBayes(NaiveBayesModel),
    Svm(SvmModel),
}

impl TrainedModel {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            TrainedModel::Winnow(_) => Algorithm::Winnow,
            TrainedModel::NaiveBayes(_) => Algorithm::NaiveBayes,
            TrainedModel::Svm(_) => Algorithm::Svm,
        }
    }

    pub fn labels(&self) -> &[String; 2] {
        match self {
            TrainedModel::Winnow(m) => m.labels(),
            TrainedModel::NaiveBayes(m) => m.labels(),
            TrainedModel::Svm(m) => m.labels(),
        }
    }

    /// Predicted label plus the continuous positive-class score (argmax
    /// between the two classes; exact ties go to the lexicographically
    /// smaller label).
    pub fn predict(&self, vector: &FeatureVector) -> Result<(String, f64)> {
        match self {
            TrainedModel::Winnow(m) => m.predict(vector),
            TrainedModel::NaiveBayes(m) => m.predict(vector),
            TrainedModel::Svm(m) => m.predict(vector),
        }
    }
}

/// Author-grouped fold assignment: every document of an author lands in
/// exactly one fold.
#[derive(Debug, Clone)]
pub struct CvPlan {
    k: usize,
    assignment: BTreeMap<String, usize>,
    seed: u64,
}

impl CvPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn fold_of(&self, author: &str) -> Option<usize> {
        self.assignment.get(author).copied()
    }

    pub fn assignment(&self) -> &BTreeMap<String, usize> {
        &self.assignment
    }
}

/// Assign authors to `k` folds by greedy balancing on document counts:
/// authors sorted by count descending (seed-shuffled tie order) each go to
/// the currently smallest fold.
pub fn make_author_folds(corpus: &Corpus, k: usize, seed: u64) -> Result<CvPlan> {
    if k < 2 {
        return Err(Error::invalid("cross-validation needs at least 2 folds"));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in corpus.documents() {
        *counts.entry(doc.author_id.as_str()).or_insert(0) += 1;
    }
    if counts.len() < k {
        return Err(Error::invalid(format!(
            "corpus has {} authors but {k} folds were requested; use a smaller k",
            counts.len()
        )));
    }
    let mut authors: Vec<(&str, usize)> = counts.into_iter().collect();
    let mut rng = rng_from_seed(seed);
    shuffle(&mut authors, &mut rng);
    // stable sort: ties keep the shuffled order
    authors.sort_by_key(|&(_, count)| std::cmp::Reverse(count));

    let mut fold_sizes = vec![0usize; k];
    let mut assignment = BTreeMap::new();
    for (author, count) in authors {
        let target = (0..k)
            .min_by_key(|&i| fold_sizes[i])
            .expect("k >= 2");
        fold_sizes[target] += count;
        assignment.insert(author.to_string(), target);
    }
    Ok(CvPlan {
        k,
        assignment,
        seed,
    })
}

/// One pooled test prediction.
#[derive(Debug, Clone)]
pub struct PooledPrediction {
    pub doc_id: String,
    pub true_label: String,
    pub predicted: String,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

#[derive(Debug, Clone)]
pub struct FoldOutcome {
    pub fold: usize,
    pub test_docs: usize,
    pub correct: usize,
    pub skipped: bool,
}

/// Micro-averaged evaluation over pooled per-example predictions.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub positive_label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tpr: f64,
    pub fpr: f64,
    pub auc: f64,
    pub n_correct: usize,
    pub n_docs: usize,
    pub confusion: Confusion,
    pub per_fold: Vec<FoldOutcome>,
}

/// Rank-sum AUC: the probability that a random positive outscores a random
/// negative, ties counting one half.
pub fn auc(scores: &[(f64, bool)]) -> Result<f64> {
    let positives = scores.iter().filter(|(_, pos)| *pos).count();
    let negatives = scores.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::invalid(
            "AUC needs at least one positive and one negative example",
        ));
    }
    let mut sorted: Vec<(f64, bool)> = scores.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("scores must not be NaN"));
    // average ranks over tie groups; rank sums stay exact in f64 because
    // every rank is an integer or half-integer
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0usize;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1].0 == sorted[i].0 {
            j += 1;
        }
        let avg_rank = (i + 1 + j + 1) as f64 / 2.0;
        for item in &sorted[i..=j] {
            if item.1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }
    let p = positives as f64;
    let u = rank_sum_pos - p * (p + 1.0) / 2.0;
    Ok(u / (p * negatives as f64))
}

/// Compute the micro-averaged report from pooled predictions. Precision,
/// recall, and the rates are taken against `positive_label`; degenerate
/// denominators yield 0.
pub fn micro_metrics(preds: &[PooledPrediction], positive_label: &str) -> Result<EvalReport> {
    if preds.is_empty() {
        return Err(Error::empty("no predictions to evaluate"));
    }
    let mut c = Confusion::default();
    for p in preds {
        let actual_pos = p.true_label == positive_label;
        let predicted_pos = p.predicted == positive_label;
        match (actual_pos, predicted_pos) {
            (true, true) => c.tp += 1,
            (false, true) => c.fp += 1,
            (true, false) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    let fpr = ratio(c.fp, c.fp + c.tn);
    let scores: Vec<(f64, bool)> = preds
        .iter()
        .map(|p| (p.score, p.true_label == positive_label))
        .collect();
    let auc_value = auc(&scores)?;
    Ok(EvalReport {
        positive_label: positive_label.to_string(),
        precision,
        recall,
        f1,
        tpr: recall,
        fpr,
        auc: auc_value,
        n_correct: c.tp + c.tn,
        n_docs: preds.len(),
        confusion: c,
        per_fold: Vec::new(),
    })
}

/// Everything cross-validation needs besides the corpus and the plan.
#[derive(Debug, Clone)]
pub struct CvOptions {
    pub k_features: usize,
    pub n_max: usize,
    pub blocklist: Blocklist,
    pub frequency_mode: FrequencyMode,
    pub winnow: WinnowParams,
    pub nb_smoothing: f64,
    pub svm: SvmParams,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            k_features: 7500,
            n_max: 3,
            blocklist: Blocklist::default_dream_words(),
            frequency_mode: FrequencyMode::Corpus,
            winnow: WinnowParams::default(),
            nb_smoothing: 1.0,
            svm: SvmParams::default(),
        }
    }
}

/// Train on labeled vectors with the chosen algorithm.
pub fn train_model(
    algorithm: Algorithm,
    examples: &[(FeatureVector, String)],
    vocab_size: usize,
    opts: &CvOptions,
) -> Result<TrainedModel> {
    Ok(match algorithm {
        Algorithm::Winnow => TrainedModel::Winnow(train_winnow(examples, vocab_size, opts.winnow)?),
        Algorithm::NaiveBayes => {
            TrainedModel::NaiveBayes(train_nb(examples, vocab_size, opts.nb_smoothing)?)
        }
        Algorithm::Svm => TrainedModel::Svm(train_svm(examples, vocab_size, opts.svm)?),
    })
}

/// Author-grouped k-fold cross-validation. Per fold the vocabulary is
/// selected on the training portion only, a model is trained, and the
/// held-out fold is predicted; predictions pool into one micro-averaged
/// report. Folds whose training side lacks a class are skipped and
/// reported.
pub fn cross_validate(
    corpus: &Corpus,
    algorithm: Algorithm,
    plan: &CvPlan,
    opts: &CvOptions,
) -> Result<EvalReport> {
    let labels: Vec<String> = corpus.labels().iter().cloned().collect();
    if labels.len() != 2 {
        return Err(Error::NotBinary { found: labels });
    }
    let positive = labels[0].clone();

    let mut folds: Vec<usize> = Vec::with_capacity(corpus.len());
    for doc in corpus.documents() {
        match plan.fold_of(&doc.author_id) {
            Some(f) => folds.push(f),
            None => return Err(Error::UnknownAuthor(doc.author_id.clone())),
        }
    }

    let mut pooled: Vec<PooledPrediction> = Vec::with_capacity(corpus.len());
    let mut per_fold = Vec::with_capacity(plan.k());
    for fold in 0..plan.k() {
        let train_docs: Vec<_> = corpus
            .documents()
            .iter()
            .zip(&folds)
            .filter(|(_, &f)| f != fold)
            .map(|(d, _)| d)
            .collect();
        let test_docs: Vec<_> = corpus
            .documents()
            .iter()
            .zip(&folds)
            .filter(|(_, &f)| f == fold)
            .map(|(d, _)| d)
            .collect();
        if test_docs.is_empty() {
            per_fold.push(FoldOutcome {
                fold,
                test_docs: 0,
                correct: 0,
                skipped: true,
            });
            continue;
        }
        let train_labels: std::collections::BTreeSet<&str> =
            train_docs.iter().map(|d| d.label.as_str()).collect();
        if train_labels.len() < 2 {
            log::warn!("fold {fold}: training portion has a single class; fold skipped");
            per_fold.push(FoldOutcome {
                fold,
                test_docs: test_docs.len(),
                correct: 0,
                skipped: true,
            });
            continue;
        }

        let train_corpus = corpus.filter(|d| plan.fold_of(&d.author_id) != Some(fold));
        let vocab = select_top_k(
            &train_corpus,
            opts.k_features,
            opts.n_max,
            &opts.blocklist,
            opts.frequency_mode,
        )?;
        let train_examples: Vec<(FeatureVector, String)> = train_docs
            .iter()
            .map(|d| (vectorize(d, &vocab), d.label.clone()))
            .collect();
        let model = train_model(algorithm, &train_examples, vocab.len(), opts)?;

        let mut correct = 0usize;
        for doc in &test_docs {
            let vector = vectorize(doc, &vocab);
            let (predicted, score) = model.predict(&vector)?;
            if predicted == doc.label {
                correct += 1;
            }
            pooled.push(PooledPrediction {
                doc_id: doc.id.clone(),
                true_label: doc.label.clone(),
                predicted,
                score,
            });
        }
        per_fold.push(FoldOutcome {
            fold,
            test_docs: test_docs.len(),
            correct,
            skipped: false,
        });
    }

    let mut report = micro_metrics(&pooled, &positive)?;
    report.per_fold = per_fold;
    Ok(report)
}

/// One entry of the per-class indicative-feature ranking.
#[derive(Debug, Clone)]
pub struct RankedFeature {
    /// 1-based rank.
    pub rank: usize,
    pub index: usize,
    pub ngram: String,
    pub net_weight: f64,
}

/// The n most indicative features per class of a Winnow model, ranked by
/// net weight (w+ - w-) descending; features never active in training are
/// absent. Ties break on the n-gram string.
pub fn top_features(
    model: &WinnowModel,
    vocab: &Vocabulary,
    n: usize,
) -> Vec<(String, Vec<RankedFeature>)> {
    let mut out = Vec::with_capacity(2);
    for class in 0..2 {
        let mut ranked: Vec<(usize, f64, String)> = model
            .net_weights(class)
            .map(|(f, net)| (f, net, vocab.ngram(f).to_string()))
            .collect();
        ranked.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("net weights are finite")
                .then_with(|| a.2.cmp(&b.2))
        });
        ranked.truncate(n);
        out.push((
            model.labels()[class].clone(),
            ranked
                .into_iter()
                .enumerate()
                .map(|(i, (index, net_weight, ngram))| RankedFeature {
                    rank: i + 1,
                    index,
                    ngram,
                    net_weight,
                })
                .collect(),
        ));
    }
    out
}
