//! Flat-file model serialization.
//!
//! Format, version 1 (tab-separated, one record per line):
//!
//! ```text
//! storyscope-model 1
//! algorithm=<winnow|naive_bayes|svm>
//! labels=<label0>\t<label1>
//! vocab_size=<V>
//! vocab_sha256=<hex fingerprint of the vocabulary dump>
//! param=<name>\t<value>          (one line per parameter)
//! weights
//! <record lines, algorithm specific>
//! ```
//!
//! Record lines: Winnow `class  feature  w_plus  w_minus` (touched
//! features only); Naive Bayes `feature  log_like_0  log_like_1` (dense);
//! SVM `feature  weight` (nonzero only). Floats use the shortest
//! round-trippable decimal form.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

use super::nb::NaiveBayesModel;
use super::svm::{SvmModel, SvmParams};
use super::winnow::{WinnowModel, WinnowParams};
use super::TrainedModel;

const MAGIC: &str = "storyscope-model 1";

pub fn save_model(model: &TrainedModel, vocab_fingerprint: &str, mut w: impl Write) -> Result<()> {
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "algorithm={}", model.algorithm().name())?;
    let labels = model.labels();
    writeln!(w, "labels={}\t{}", labels[0], labels[1])?;
    match model {
        TrainedModel::Winnow(m) => {
            writeln!(w, "vocab_size={}", m.vocab_size())?;
            writeln!(w, "vocab_sha256={vocab_fingerprint}")?;
            let p = m.params();
            writeln!(w, "param=alpha\t{}", p.alpha)?;
            writeln!(w, "param=beta\t{}", p.beta)?;
            writeln!(w, "param=theta_plus\t{}", p.theta_plus)?;
            writeln!(w, "param=theta_minus\t{}", p.theta_minus)?;
            writeln!(w, "param=iterations\t{}", p.iterations)?;
            writeln!(w, "weights")?;
            for class in 0..2 {
                let mut entries: Vec<(usize, (f64, f64))> = m
                    .weight_table(class)
                    .iter()
                    .map(|(&f, &ws)| (f, ws))
                    .collect();
                entries.sort_by_key(|(f, _)| *f);
                for (f, (wp, wm)) in entries {
                    writeln!(w, "{class}\t{f}\t{wp}\t{wm}")?;
                }
            }
        }
        TrainedModel::NaiveBayes(m) => {
            writeln!(w, "vocab_size={}", m.vocab_size())?;
            writeln!(w, "vocab_sha256={vocab_fingerprint}")?;
            writeln!(w, "param=smoothing\t{}", m.smoothing())?;
            let priors = m.log_priors();
            writeln!(w, "param=log_prior_0\t{}", priors[0])?;
            writeln!(w, "param=log_prior_1\t{}", priors[1])?;
            writeln!(w, "weights")?;
            let tables = m.log_like_tables();
            for (f, (a, b)) in tables[0].iter().zip(&tables[1]).enumerate() {
                writeln!(w, "{f}\t{a}\t{b}")?;
            }
        }
        TrainedModel::Svm(m) => {
            writeln!(w, "vocab_size={}", m.vocab_size())?;
            writeln!(w, "vocab_sha256={vocab_fingerprint}")?;
            let p = m.params();
            writeln!(w, "param=c\t{}", p.c)?;
            writeln!(w, "param=tol\t{}", p.tol)?;
            writeln!(w, "param=max_epoch_factor\t{}", p.max_epoch_factor)?;
            writeln!(w, "param=bias\t{}", m.bias())?;
            writeln!(w, "param=converged\t{}", m.converged())?;
            writeln!(w, "weights")?;
            for (f, &weight) in m.weights().iter().enumerate() {
                if weight != 0.0 {
                    writeln!(w, "{f}\t{weight}")?;
                }
            }
        }
    }
    Ok(())
}

/// Load a model plus the vocabulary fingerprint it was trained against.
pub fn load_model(r: impl BufRead) -> Result<(TrainedModel, String)> {
    let mut lines = r.lines();
    let magic = next_line(&mut lines)?;
    if magic != MAGIC {
        return Err(Error::ModelFormat(format!(
            "unsupported header {magic:?}; expected {MAGIC:?}"
        )));
    }
    let algorithm = expect_kv(&next_line(&mut lines)?, "algorithm")?;
    let labels_raw = expect_kv(&next_line(&mut lines)?, "labels")?;
    let labels: Vec<&str> = labels_raw.split('\t').collect();
    if labels.len() != 2 {
        return Err(Error::ModelFormat("labels line must have two fields".into()));
    }
    let labels = [labels[0].to_string(), labels[1].to_string()];
    let vocab_size: usize = expect_kv(&next_line(&mut lines)?, "vocab_size")?
        .parse()
        .map_err(|_| Error::ModelFormat("vocab_size is not an integer".into()))?;
    let fingerprint = expect_kv(&next_line(&mut lines)?, "vocab_sha256")?;

    let mut params: HashMap<String, String> = HashMap::new();
    let mut line = next_line(&mut lines)?;
    while let Some(rest) = line.strip_prefix("param=") {
        let mut parts = rest.splitn(2, '\t');
        let name = parts
            .next()
            .ok_or_else(|| Error::ModelFormat("bad param line".into()))?;
        let value = parts
            .next()
            .ok_or_else(|| Error::ModelFormat(format!("param {name} has no value")))?;
        params.insert(name.to_string(), value.to_string());
        line = next_line(&mut lines)?;
    }
    if line != "weights" {
        return Err(Error::ModelFormat(format!(
            "expected weights section, found {line:?}"
        )));
    }

    let get_f64 = |params: &HashMap<String, String>, name: &str| -> Result<f64> {
        params
            .get(name)
            .ok_or_else(|| Error::ModelFormat(format!("missing param {name}")))?
            .parse::<f64>()
            .map_err(|_| Error::ModelFormat(format!("param {name} is not a number")))
    };

    let model = match algorithm.as_str() {
        "winnow" => {
            let winnow_params = WinnowParams {
                alpha: get_f64(&params, "alpha")?,
                beta: get_f64(&params, "beta")?,
                theta_plus: get_f64(&params, "theta_plus")?,
                theta_minus: get_f64(&params, "theta_minus")?,
                iterations: get_f64(&params, "iterations")? as usize,
            };
            let mut weights: [HashMap<usize, (f64, f64)>; 2] = [HashMap::new(), HashMap::new()];
            for line in lines {
                let line = line?;
                if line.is_empty() {
                    continue;
                }
                let fields: Vec<&str> = line.split('\t').collect();
                if fields.len() != 4 {
                    return Err(Error::ModelFormat(format!("bad weight record {line:?}")));
                }
                let class: usize = parse_field(fields[0])?;
                if class > 1 {
                    return Err(Error::ModelFormat("class index must be 0 or 1".into()));
                }
                let feature: usize = parse_field(fields[1])?;
                weights[class].insert(feature, (parse_field(fields[2])?, parse_field(fields[3])?));
            }
            TrainedModel::Winnow(WinnowModel::from_parts(
                labels,
                weights,
                winnow_params,
                vocab_size,
            ))
        }
        "naive_bayes" => {
            let smoothing = get_f64(&params, "smoothing")?;
            let log_prior = [get_f64(&params, "log_prior_0")?, get_f64(&params, "log_prior_1")?];
            let mut log_like = [vec![0.0; vocab_size], vec![0.0; vocab_size]];
            let mut seen = 0usize;
            for line in lines {
                let line = line?;
                if line.is_empty() {
                    continue;
                }
                let fields: Vec<&str> = line.split('\t').collect();
                if fields.len() != 3 {
                    return Err(Error::ModelFormat(format!("bad record {line:?}")));
                }
                let f: usize = parse_field(fields[0])?;
                if f >= vocab_size {
                    return Err(Error::ModelFormat("feature index out of range".into()));
                }
                log_like[0][f] = parse_field(fields[1])?;
                log_like[1][f] = parse_field(fields[2])?;
                seen += 1;
            }
            if seen != vocab_size {
                return Err(Error::ModelFormat(format!(
                    "expected {vocab_size} likelihood records, found {seen}"
                )));
            }
            TrainedModel::NaiveBayes(NaiveBayesModel::from_parts(
                labels, log_prior, log_like, smoothing,
            ))
        }
        "svm" => {
            let svm_params = SvmParams {
                c: get_f64(&params, "c")?,
                tol: get_f64(&params, "tol")?,
                max_epoch_factor: get_f64(&params, "max_epoch_factor")? as usize,
            };
            let bias = get_f64(&params, "bias")?;
            let converged = params.get("converged").map(|v| v == "true").unwrap_or(true);
            let mut weights = vec![0.0f64; vocab_size];
            for line in lines {
                let line = line?;
                if line.is_empty() {
                    continue;
                }
                let fields: Vec<&str> = line.split('\t').collect();
                if fields.len() != 2 {
                    return Err(Error::ModelFormat(format!("bad record {line:?}")));
                }
                let f: usize = parse_field(fields[0])?;
                if f >= vocab_size {
                    return Err(Error::ModelFormat("feature index out of range".into()));
                }
                weights[f] = parse_field(fields[1])?;
            }
            TrainedModel::Svm(SvmModel::from_parts(labels, weights, bias, svm_params, converged))
        }
        other => {
            return Err(Error::ModelFormat(format!("unknown algorithm {other:?}")));
        }
    };
    Ok((model, fingerprint))
}

fn next_line(lines: &mut impl Iterator<Item = std::io::Result<String>>) -> Result<String> {
    match lines.next() {
        Some(line) => Ok(line?),
        None => Err(Error::ModelFormat("unexpected end of file".into())),
    }
}

fn expect_kv(line: &str, key: &str) -> Result<String> {
    line.strip_prefix(&format!("{key}="))
        .map(str::to_string)
        .ok_or_else(|| Error::ModelFormat(format!("expected {key}=..., found {line:?}")))
}

fn parse_field<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse::<T>()
        .map_err(|_| Error::ModelFormat(format!("could not parse field {s:?}")))
}
