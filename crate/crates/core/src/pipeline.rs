//! End-to-end experiment driver: ingest and sample the corpora once, then
//! run the requested stages in dependency order, each emitting TSV reports
//! with a config-hash header. Reports are written atomically, so a failing
//! stage never corrupts the outputs of completed stages.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::path::PathBuf;

use crate::classify::{
    cross_validate, make_author_folds, top_features, train_winnow, CvOptions, WinnowParams,
};
use crate::coherence::{
    build_entity_grid, count_markers, discrimination_report, run_discrimination, train_egrid,
    MarkerLexicon,
};
use crate::config::ExperimentConfig;
use crate::corpus::{
    cap_per_author, corpus_stats, dedup_exact, downsample_to_tokens, filter_english, ingest_jsonl,
    label_stats, write_jsonl, Corpus, IngestIssue,
};
use crate::data::english_stopwords;
use crate::error::{Error, Result};
use crate::features::{select_top_k, vectorize, Blocklist, FrequencyMode};
use crate::report::{f4, f6, write_report, ReportMeta};
use crate::rng::{rng_from_seed, shuffle};
use crate::topics::{contrast_samples, fit_lda, save_topic_model, ContentCorpus, LdaParams, TopicModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Stats,
    Classify,
    Topics,
    Contrast,
    Markers,
    Egrid,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Stats,
        Stage::Classify,
        Stage::Topics,
        Stage::Contrast,
        Stage::Markers,
        Stage::Egrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Stats => "stats",
            Stage::Classify => "classify",
            Stage::Topics => "topics",
            Stage::Contrast => "contrast",
            Stage::Markers => "markers",
            Stage::Egrid => "egrid",
        }
    }

    pub fn parse(s: &str) -> Option<Stage> {
        Some(match s.trim() {
            "stats" => Stage::Stats,
            "classify" => Stage::Classify,
            "topics" => Stage::Topics,
            "contrast" => Stage::Contrast,
            "markers" => Stage::Markers,
            "egrid" => Stage::Egrid,
            _ => return None,
        })
    }
}

/// Per-label ingestion and sampling tally.
#[derive(Debug, Clone)]
pub struct LabelPrep {
    pub label: String,
    pub records_read: usize,
    pub issues: Vec<IngestIssue>,
    pub removed_language: usize,
    pub removed_duplicates: usize,
    pub removed_author_cap: usize,
    pub removed_budget: usize,
    pub kept: usize,
}

/// The sampled corpora every stage works from.
pub struct Prepared {
    pub labels: Vec<String>,
    pub by_label: BTreeMap<String, Corpus>,
    pub merged: Corpus,
    pub prep: Vec<LabelPrep>,
}

/// Ingest, language-filter, de-duplicate, cap, and downsample every
/// configured corpus. Deterministic per config seed; per-label sampling
/// seeds are `seed + 2*label_index` (cap) and `seed + 2*label_index + 1`
/// (downsampling) over sorted labels.
pub fn prepare(config: &ExperimentConfig) -> Result<Prepared> {
    let seed = config.seed_u64();
    let mut by_label = BTreeMap::new();
    let mut prep = Vec::new();
    for (idx, (label, path)) in config.corpora.iter().enumerate() {
        let file = std::fs::File::open(path)?;
        let outcome = ingest_jsonl(std::io::BufReader::new(file))?;
        for issue in &outcome.issues {
            log::warn!("{label}: {issue}");
        }
        let records_read = outcome.corpus.len() + outcome.issues.len();
        let filtered = filter_english(
            &outcome.corpus,
            config.sampling.english_threshold,
            english_stopwords(),
        );
        let (deduped, removed_duplicates) = dedup_exact(&filtered.corpus);
        let capped = match config.sampling.per_author_cap {
            Some(cap) => cap_per_author(&deduped, cap, seed + 2 * idx as u64)?,
            None => deduped.clone(),
        };
        let removed_author_cap = deduped.len() - capped.len();
        let sampled = match config.sampling.token_budget {
            Some(budget) => downsample_to_tokens(&capped, budget, seed + 2 * idx as u64 + 1)?,
            None => capped.clone(),
        };
        let removed_budget = capped.len() - sampled.len();
        prep.push(LabelPrep {
            label: label.clone(),
            records_read,
            issues: outcome.issues,
            removed_language: filtered.removed,
            removed_duplicates,
            removed_author_cap,
            removed_budget,
            kept: sampled.len(),
        });
        by_label.insert(label.clone(), sampled);
    }
    let labels: Vec<String> = by_label.keys().cloned().collect();
    // round-robin across labels so no label forms one solid block; the
    // one-pass Winnow trains in corpus order and a label-blocked stream
    // would let whichever class comes last crowd out the other
    let mut queues: Vec<std::collections::VecDeque<_>> = by_label
        .values()
        .map(|c| c.documents().iter().cloned().collect())
        .collect();
    let mut interleaved = Vec::with_capacity(queues.iter().map(|q| q.len()).sum());
    while queues.iter().any(|q| !q.is_empty()) {
        for q in &mut queues {
            if let Some(doc) = q.pop_front() {
                interleaved.push(doc);
            }
        }
    }
    let merged = Corpus::from_documents(interleaved)?;
    Ok(Prepared {
        labels,
        by_label,
        merged,
        prep,
    })
}

#[derive(Debug, Default)]
pub struct RunSummary {
    pub reports: Vec<PathBuf>,
}

fn meta(config: &ExperimentConfig) -> ReportMeta {
    ReportMeta::new(config.config_hash.clone(), config.seed_u64())
}

/// Run the requested stages in dependency order.
pub fn run(config: &ExperimentConfig, stages: &[Stage]) -> Result<RunSummary> {
    let violations = config.validate();
    if !violations.is_empty() {
        return Err(Error::Config(violations));
    }
    std::fs::create_dir_all(&config.out_dir)?;

    let wanted: BTreeSet<Stage> = stages.iter().copied().collect();
    let prepared = prepare(config)?;
    let mut summary = RunSummary::default();

    let staged = |stage: Stage, e: Error| Error::Stage {
        stage: stage.name().to_string(),
        source: Box::new(e),
    };

    if wanted.contains(&Stage::Stats) {
        stage_stats(config, &prepared, &mut summary).map_err(|e| staged(Stage::Stats, e))?;
    }
    if wanted.contains(&Stage::Classify) {
        stage_classify(config, &prepared, &mut summary).map_err(|e| staged(Stage::Classify, e))?;
    }

    // the contrast stage reuses the fitted topic model
    let mut model: Option<TopicModel> = None;
    if wanted.contains(&Stage::Topics) || wanted.contains(&Stage::Contrast) {
        let fitted = stage_topics_fit(config, &prepared).map_err(|e| staged(Stage::Topics, e))?;
        if wanted.contains(&Stage::Topics) {
            stage_topics_reports(config, &fitted, &mut summary)
                .map_err(|e| staged(Stage::Topics, e))?;
        }
        model = Some(fitted);
    }
    if wanted.contains(&Stage::Contrast) {
        let model = model.as_ref().expect("fitted above");
        stage_contrast(config, &prepared, model, &mut summary)
            .map_err(|e| staged(Stage::Contrast, e))?;
    }
    if wanted.contains(&Stage::Markers) {
        stage_markers(config, &prepared, &mut summary).map_err(|e| staged(Stage::Markers, e))?;
    }
    if wanted.contains(&Stage::Egrid) {
        stage_egrid(config, &prepared, &mut summary).map_err(|e| staged(Stage::Egrid, e))?;
    }
    Ok(summary)
}

/// The `ingest` subcommand: materialize the sampled corpora as JSONL plus
/// an ingestion report.
pub fn run_ingest(config: &ExperimentConfig) -> Result<RunSummary> {
    let violations = config.validate();
    if !violations.is_empty() {
        return Err(Error::Config(violations));
    }
    std::fs::create_dir_all(&config.out_dir)?;
    let prepared = prepare(config)?;
    let mut summary = RunSummary::default();
    for (label, corpus) in &prepared.by_label {
        let path = config.out_dir.join(format!("corpus_{label}.jsonl"));
        let tmp = path.with_extension("tmp");
        let mut w = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
        write_jsonl(corpus, &mut w)?;
        drop(w);
        std::fs::rename(&tmp, &path)?;
        summary.reports.push(path);
    }
    let rows: Vec<Vec<String>> = prepared
        .prep
        .iter()
        .map(|p| {
            vec![
                p.label.clone(),
                p.records_read.to_string(),
                p.issues.len().to_string(),
                p.removed_language.to_string(),
                p.removed_duplicates.to_string(),
                p.removed_author_cap.to_string(),
                p.removed_budget.to_string(),
                p.kept.to_string(),
            ]
        })
        .collect();
    let path = write_report(
        &config.out_dir.join("ingest_report.tsv"),
        &meta(config).with("stage", "ingest"),
        &[
            "label",
            "records_read",
            "rejected_records",
            "removed_language",
            "removed_duplicates",
            "removed_author_cap",
            "removed_budget",
            "kept",
        ],
        rows,
    )?;
    summary.reports.push(path);
    Ok(summary)
}

fn stage_stats(
    config: &ExperimentConfig,
    prepared: &Prepared,
    summary: &mut RunSummary,
) -> Result<()> {
    let mut rows = Vec::new();
    for (label, stats) in label_stats(&prepared.merged) {
        rows.push(vec![
            label,
            stats.doc_count.to_string(),
            stats.total_tokens.to_string(),
            f4(stats.mean_doc_len),
            f4(stats.pop_stddev_doc_len),
        ]);
    }
    let overall = corpus_stats(&prepared.merged);
    rows.push(vec![
        "all".into(),
        overall.doc_count.to_string(),
        overall.total_tokens.to_string(),
        f4(overall.mean_doc_len),
        f4(overall.pop_stddev_doc_len),
    ]);
    let path = write_report(
        &config.out_dir.join("stats.tsv"),
        &meta(config).with("stage", "stats"),
        &["label", "doc_count", "total_tokens", "mean_len", "pop_stddev"],
        rows,
    )?;
    summary.reports.push(path);
    Ok(())
}

fn blocklist_of(config: &ExperimentConfig) -> Result<Blocklist> {
    Ok(match &config.classification.blocklist {
        Some(path) => Blocklist::from_path(path)?,
        None => Blocklist::default_dream_words(),
    })
}

fn stage_classify(
    config: &ExperimentConfig,
    prepared: &Prepared,
    summary: &mut RunSummary,
) -> Result<()> {
    let seed = config.seed_u64();
    let plan = make_author_folds(&prepared.merged, config.classification.folds, seed)?;
    let frequency_mode = match config.classification.frequency_mode.as_str() {
        "document" => FrequencyMode::Document,
        _ => FrequencyMode::Corpus,
    };
    let opts = CvOptions {
        k_features: config.classification.k_features,
        n_max: 3,
        blocklist: blocklist_of(config)?,
        frequency_mode,
        ..CvOptions::default()
    };

    let mut rows = Vec::new();
    let mut positive = String::new();
    for algorithm in config.algorithms()? {
        let report = cross_validate(&prepared.merged, algorithm, &plan, &opts)?;
        positive = report.positive_label.clone();
        rows.push(vec![
            algorithm.name().to_string(),
            f4(report.precision),
            f4(report.recall),
            f4(report.f1),
            f4(report.tpr),
            f4(report.fpr),
            f4(report.auc),
            report.n_correct.to_string(),
        ]);
    }
    let path = write_report(
        &config.out_dir.join("classification.tsv"),
        &meta(config)
            .with("stage", "classify")
            .with("positive_label", &positive)
            .with("folds", config.classification.folds.to_string())
            .with("k_features", config.classification.k_features.to_string())
            .with("n_docs", prepared.merged.len().to_string()),
        &["algorithm", "precision", "recall", "f1", "tpr", "fpr", "auc", "n_correct"],
        rows,
    )?;
    summary.reports.push(path);

    // indicative features come from a Winnow model trained on the full
    // corpus over a full-corpus vocabulary
    if config
        .algorithms()?
        .contains(&crate::classify::Algorithm::Winnow)
    {
        let vocab = select_top_k(
            &prepared.merged,
            config.classification.k_features,
            3,
            &opts.blocklist,
            frequency_mode,
        )?;
        let examples: Vec<_> = prepared
            .merged
            .documents()
            .iter()
            .map(|d| (vectorize(d, &vocab), d.label.clone()))
            .collect();
        let model = train_winnow(&examples, vocab.len(), WinnowParams::default())?;
        let mut rows = Vec::new();
        for (class, features) in top_features(&model, &vocab, config.classification.top_features) {
            for f in features {
                rows.push(vec![
                    class.clone(),
                    f.rank.to_string(),
                    f.ngram,
                    f6(f.net_weight),
                ]);
            }
        }
        let path = write_report(
            &config.out_dir.join("top_features.tsv"),
            &meta(config).with("stage", "classify"),
            &["class", "rank", "ngram", "net_weight"],
            rows,
        )?;
        summary.reports.push(path);

        let vocab_rows = vocab.entries().iter().enumerate().map(|(i, e)| {
            vec![i.to_string(), e.ngram.to_string(), e.train_frequency.to_string()]
        });
        let path = write_report(
            &config.out_dir.join("vocabulary.tsv"),
            &meta(config).with("stage", "classify"),
            &["index", "ngram", "train_frequency"],
            vocab_rows,
        )?;
        summary.reports.push(path);

        let model_path = config.out_dir.join("winnow_model.txt");
        let tmp = model_path.with_extension("tmp");
        let mut w = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
        crate::classify::model_io::save_model(
            &crate::classify::TrainedModel::Winnow(model),
            &vocab.fingerprint(),
            &mut w,
        )?;
        drop(w);
        std::fs::rename(&tmp, &model_path)?;
        summary.reports.push(model_path);
    }
    Ok(())
}

fn stage_topics_fit(config: &ExperimentConfig, prepared: &Prepared) -> Result<TopicModel> {
    let mode = config
        .topics
        .mode()
        .ok_or_else(|| Error::invalid("bad filter mode"))?;
    let content = ContentCorpus::build(&prepared.merged, mode);
    let params = LdaParams {
        topics: config.topics.topics,
        iterations: config.topics.iterations,
        alpha: config.topics.effective_alpha(),
        beta: config.topics.beta,
        seed: config.seed_u64(),
    };
    fit_lda(content, params)
}

fn stage_topics_reports(
    config: &ExperimentConfig,
    model: &TopicModel,
    summary: &mut RunSummary,
) -> Result<()> {
    let stage_meta = || {
        meta(config)
            .with("stage", "topics")
            .with("filter_mode", &config.topics.filter_mode)
            .with("topics", config.topics.topics.to_string())
            .with("iterations", config.topics.iterations.to_string())
    };
    let mut rows = Vec::new();
    for topic in 0..model.topic_count() {
        for (rank, (word, phi)) in model
            .top_words(topic, config.topics.top_words)
            .into_iter()
            .enumerate()
        {
            rows.push(vec![
                topic.to_string(),
                (rank + 1).to_string(),
                word,
                f6(phi),
            ]);
        }
    }
    let path = write_report(
        &config.out_dir.join("topics.tsv"),
        &stage_meta(),
        &["topic_id", "rank", "word", "phi"],
        rows,
    )?;
    summary.reports.push(path);

    let mut rows = Vec::new();
    for (d, annotation) in model.annotate(config.topics.threshold).iter().enumerate() {
        let theta = model.theta(d);
        for &topic in &annotation.topics {
            rows.push(vec![
                annotation.doc_id.clone(),
                topic.to_string(),
                f6(theta[topic]),
            ]);
        }
    }
    let path = write_report(
        &config.out_dir.join("annotations.tsv"),
        &stage_meta().with("threshold", f4(config.topics.threshold)),
        &["doc_id", "topic_id", "theta"],
        rows,
    )?;
    summary.reports.push(path);

    let model_path = config.out_dir.join("lda_model.txt");
    let tmp = model_path.with_extension("tmp");
    let mut w = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
    save_topic_model(model, &mut w)?;
    drop(w);
    std::fs::rename(&tmp, &model_path)?;
    summary.reports.push(model_path);
    Ok(())
}

fn stage_contrast(
    config: &ExperimentConfig,
    prepared: &Prepared,
    model: &TopicModel,
    summary: &mut RunSummary,
) -> Result<()> {
    if prepared.labels.len() != 2 {
        return Err(Error::NotBinary {
            found: prepared.labels.clone(),
        });
    }
    let seed = config.seed_u64();
    let mut samples: Vec<BTreeSet<String>> = Vec::new();
    for (idx, label) in prepared.labels.iter().enumerate() {
        let corpus = &prepared.by_label[label];
        let mut ids: Vec<&str> = corpus.documents().iter().map(|d| d.id.as_str()).collect();
        let mut rng = rng_from_seed(seed + 7777 + idx as u64);
        shuffle(&mut ids, &mut rng);
        ids.truncate(config.topics.contrast_sample.min(ids.len()));
        samples.push(ids.into_iter().map(str::to_string).collect());
    }
    let annotations = model.annotate(config.topics.threshold);
    let results = contrast_samples(&annotations, model.topic_count(), &samples[0], &samples[1])?;
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            let words: Vec<String> = model
                .top_words(r.topic, config.topics.top_words)
                .into_iter()
                .map(|(w, _)| w)
                .collect();
            vec![
                r.topic.to_string(),
                r.count_a.to_string(),
                r.count_b.to_string(),
                r.n_a.to_string(),
                r.n_b.to_string(),
                f4(r.g),
                r.significant.to_string(),
                r.direction.name().to_string(),
                words.join("_"),
            ]
        })
        .collect();
    let significant = results.iter().filter(|r| r.significant).count();
    let path = write_report(
        &config.out_dir.join("contrast.tsv"),
        &meta(config)
            .with("stage", "contrast")
            .with("sample_a", &prepared.labels[0])
            .with("sample_b", &prepared.labels[1])
            .with("filter_mode", &config.topics.filter_mode)
            .with("significant_topics", significant.to_string()),
        &[
            "topic_id",
            "count_a",
            "count_b",
            "n_a",
            "n_b",
            "G",
            "significant",
            "direction",
            "top_words",
        ],
        rows,
    )?;
    summary.reports.push(path);
    Ok(())
}

fn stage_markers(
    config: &ExperimentConfig,
    prepared: &Prepared,
    summary: &mut RunSummary,
) -> Result<()> {
    let lexicon = match &config.coherence.lexicon {
        Some(path) => MarkerLexicon::from_path(path)?,
        None => MarkerLexicon::bundled(),
    };
    let mut rows = Vec::new();
    for label in &prepared.labels {
        let profile = count_markers(&prepared.by_label[label], &lexicon, label);
        for i in 0..lexicon.len() {
            rows.push(vec![
                label.clone(),
                lexicon.connective_key(i),
                profile.counts[i].to_string(),
                f4(profile.rate_per_10k(i)),
            ]);
        }
    }
    let path = write_report(
        &config.out_dir.join("markers.tsv"),
        &meta(config)
            .with("stage", "markers")
            .with("lexicon_size", lexicon.len().to_string()),
        &["corpus", "connective", "count", "rate_per_10k"],
        rows,
    )?;
    summary.reports.push(path);
    Ok(())
}

fn stage_egrid(
    config: &ExperimentConfig,
    prepared: &Prepared,
    summary: &mut RunSummary,
) -> Result<()> {
    let h = config.coherence.history;
    let smoothing = config.coherence.smoothing;
    let n_perm = config.coherence.permutations;
    let seed = config.seed_u64();
    let mut rows = Vec::new();
    for (idx, label) in prepared.labels.iter().enumerate() {
        let test_corpus = &prepared.by_label[label];
        let train_docs: Vec<_> = if config.coherence.egrid_train == "self" {
            test_corpus.documents().to_vec()
        } else {
            prepared
                .merged
                .documents()
                .iter()
                .filter(|d| &d.label != label)
                .cloned()
                .collect()
        };
        let grids: Vec<_> = train_docs.iter().map(build_entity_grid).collect();
        let model = train_egrid(&grids, h, smoothing)?;
        let outcomes = run_discrimination(
            &model,
            test_corpus.documents(),
            n_perm,
            seed + idx as u64 * 1_000_000,
        );
        let report = discrimination_report(&outcomes)?;
        rows.push(vec![
            label.clone(),
            report.docs.to_string(),
            report.pairs.to_string(),
            report.wins.to_string(),
            report.ties.to_string(),
            report.losses.to_string(),
            f4(report.accuracy),
            f4(report.f_score),
        ]);
    }
    let path = write_report(
        &config.out_dir.join("egrid.tsv"),
        &meta(config)
            .with("stage", "egrid")
            .with("history", h.to_string())
            .with("permutations", n_perm.to_string())
            .with("train_on", &config.coherence.egrid_train),
        &["corpus", "docs", "pairs", "wins", "ties", "losses", "accuracy", "f_score"],
        rows,
    )?;
    summary.reports.push(path);
    Ok(())
}
