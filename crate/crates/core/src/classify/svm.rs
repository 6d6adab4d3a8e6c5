//! Soft-margin linear SVM trained by sequential minimal optimization.
//!
//! The solver maximizes the standard dual of
//! minimize (1/2)||w||^2 + C * sum hinge(y * (w.x + b))
//! with the bias handled through the dual equality constraint, picking the
//! maximal violating pair each step and solving the two-variable
//! subproblem analytically. Convergence is declared when the violation
//! gap m(alpha) - M(alpha) drops to the tolerance; otherwise the update
//! cap is reported. Every pair step decreases the dual minimization
//! objective, which the per-epoch trace exposes for testing.

use crate::error::{Error, Result};
use crate::features::FeatureVector;

use super::winnow::binary_labels;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    /// Soft-margin cost.
    pub c: f64,
    /// Violation tolerance on the maximal-violating-pair gap.
    pub tol: f64,
    /// Update cap expressed in epochs of |train| pair updates per epoch:
    /// training stops after `max_epoch_factor * |train|` epochs.
    pub max_epoch_factor: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            tol: 1e-3,
            max_epoch_factor: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SvmModel {
    labels: [String; 2],
    weights: Vec<f64>,
    bias: f64,
    params: SvmParams,
    converged: bool,
    vocab_size: usize,
}

impl SvmModel {
    pub fn labels(&self) -> &[String; 2] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn params(&self) -> &SvmParams {
        &self.params
    }

    /// False when training stopped at the update cap instead of the
    /// tolerance criterion.
    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    /// Signed decision value w.x + b; positive means labels[0].
    pub fn score(&self, vector: &FeatureVector) -> Result<f64> {
        if let Some(&max) = vector.active().last() {
            if max >= self.vocab_size {
                return Err(Error::FeatureOutOfRange {
                    index: max,
                    vocab_size: self.vocab_size,
                });
            }
        }
        let dot: f64 = vector.active().iter().map(|&f| self.weights[f]).sum();
        Ok(dot + self.bias)
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

    pub(crate) fn from_parts(
        labels: [String; 2],
        weights: Vec<f64>,
        bias: f64,
        params: SvmParams,
        converged: bool,
    ) -> SvmModel {
        let vocab_size = weights.len();
        SvmModel {
            labels,
            weights,
            bias,
            params,
            converged,
            vocab_size,
        }
    }
}

/// Primal objective (1/2)||w||^2 + C * sum hinge, evaluated on binary
/// vectors.
pub fn primal_objective(
    examples: &[(FeatureVector, String)],
    positive_label: &str,
    weights: &[f64],
    bias: f64,
    c: f64,
) -> f64 {
    let reg: f64 = 0.5 * weights.iter().map(|w| w * w).sum::<f64>();
    let loss: f64 = examples
        .iter()
        .map(|(v, label)| {
            let y = if label == positive_label { 1.0 } else { -1.0 };
            let margin: f64 = v.active().iter().map(|&f| weights[f]).sum::<f64>() + bias;
            (1.0 - y * margin).max(0.0)
        })
        .sum();
    reg + c * loss
}

pub fn train_svm(
    examples: &[(FeatureVector, String)],
    vocab_size: usize,
    params: SvmParams,
) -> Result<SvmModel> {
    Ok(train_svm_traced(examples, vocab_size, params)?.0)
}

/// Train and also return the dual minimization objective sampled once per
/// epoch (non-increasing by construction).
pub fn train_svm_traced(
    examples: &[(FeatureVector, String)],
    vocab_size: usize,
    params: SvmParams,
) -> Result<(SvmModel, Vec<f64>)> {
    if !params.c.is_finite() || params.c <= 0.0 {
        return Err(Error::invalid("svm C must be > 0"));
    }
    if !params.tol.is_finite() || params.tol <= 0.0 {
        return Err(Error::invalid("svm tolerance must be > 0"));
    }
    let labels = binary_labels(examples)?;
    let n = examples.len();
    let mut ys = Vec::with_capacity(n);
    for (vector, label) in examples {
        if let Some(&max) = vector.active().last() {
            if max >= vocab_size {
                return Err(Error::FeatureOutOfRange {
                    index: max,
                    vocab_size,
                });
            }
        }
        ys.push(if *label == labels[0] { 1.0f64 } else { -1.0f64 });
    }

    // inverted index: feature -> documents containing it, for cheap
    // margin maintenance after each pair update
    let mut docs_with: Vec<Vec<u32>> = vec![Vec::new(); vocab_size];
    for (t, (vector, _)) in examples.iter().enumerate() {
        for &f in vector.active() {
            docs_with[f].push(t as u32);
        }
    }

    let c = params.c;
    let mut alpha = vec![0.0f64; n];
    let mut weights = vec![0.0f64; vocab_size];
    let mut margins = vec![0.0f64; n]; // w . x_t
    let qd: Vec<f64> = examples.iter().map(|(v, _)| v.len() as f64).collect();

    let epoch_len = n.max(1) as u64;
    let max_updates = epoch_len * epoch_len * params.max_epoch_factor as u64;
    let mut updates: u64 = 0;
    let mut converged = false;
    let mut trace = Vec::new();
    let dual_objective = |alpha: &[f64], weights: &[f64]| -> f64 {
        0.5 * weights.iter().map(|w| w * w).sum::<f64>() - alpha.iter().sum::<f64>()
    };
    trace.push(dual_objective(&alpha, &weights));

    loop {
        // maximal violating pair over v_t = y_t - w.x_t
        let mut m_val = f64::NEG_INFINITY;
        let mut m_idx = None;
        let mut big_m_val = f64::INFINITY;
        let mut big_m_idx = None;
        for t in 0..n {
            let v = ys[t] - margins[t];
            let in_up = (ys[t] > 0.0 && alpha[t] < c) || (ys[t] < 0.0 && alpha[t] > 0.0);
            let in_low = (ys[t] < 0.0 && alpha[t] < c) || (ys[t] > 0.0 && alpha[t] > 0.0);
            if in_up && v > m_val {
                m_val = v;
                m_idx = Some(t);
            }
            if in_low && v < big_m_val {
                big_m_val = v;
                big_m_idx = Some(t);
            }
        }
        let (i, j) = match (m_idx, big_m_idx) {
            (Some(i), Some(j)) if m_val - big_m_val > params.tol => (i, j),
            _ => {
                converged = true;
                break;
            }
        };
        if updates >= max_updates {
            break;
        }

        let k_ij = intersection_size(examples[i].0.active(), examples[j].0.active()) as f64;
        let g_i = ys[i] * margins[i] - 1.0;
        let g_j = ys[j] * margins[j] - 1.0;
        let old_i = alpha[i];
        let old_j = alpha[j];

        if ys[i] != ys[j] {
            let quad = (qd[i] + qd[j] + 2.0 * k_ij).max(TAU);
            let delta = (-g_i - g_j) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else {
                if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            }
        } else {
            let quad = (qd[i] + qd[j] - 2.0 * k_ij).max(TAU);
            let delta = (g_i - g_j) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
        }

        let delta_i = ys[i] * (alpha[i] - old_i);
        let delta_j = ys[j] * (alpha[j] - old_j);
        if delta_i != 0.0 {
            for &f in examples[i].0.active() {
                weights[f] += delta_i;
                for &t in &docs_with[f] {
                    margins[t as usize] += delta_i;
                }
            }
        }
        if delta_j != 0.0 {
            for &f in examples[j].0.active() {
                weights[f] += delta_j;
                for &t in &docs_with[f] {
                    margins[t as usize] += delta_j;
                }
            }
        }

        updates += 1;
        if updates.is_multiple_of(epoch_len) {
            trace.push(dual_objective(&alpha, &weights));
        }
    }
    trace.push(dual_objective(&alpha, &weights));

    if !converged {
        log::warn!(
            "svm solver hit the update cap ({max_updates} pair updates) before reaching \
             tolerance {}",
            params.tol
        );
    }

    // bias: average over free support vectors, else the midpoint of the
    // feasible interval from the stopping quantities
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for t in 0..n {
        let v = ys[t] - margins[t];
        if alpha[t] > 0.0 && alpha[t] < c {
            free_sum += v;
            free_count += 1;
        } else {
            let in_up = (ys[t] > 0.0 && alpha[t] < c) || (ys[t] < 0.0 && alpha[t] > 0.0);
            let in_low = (ys[t] < 0.0 && alpha[t] < c) || (ys[t] > 0.0 && alpha[t] > 0.0);
            if in_up {
                lo = lo.max(v);
            }
            if in_low {
                hi = hi.min(v);
            }
        }
    }
    let bias = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => (lo + hi) / 2.0,
            (true, false) => lo,
            (false, true) => hi,
            (false, false) => 0.0,
        }
    };

    Ok((
        SvmModel {
            labels,
            weights,
            bias,
            params,
            converged,
            vocab_size,
        },
        trace,
    ))
}

fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}
