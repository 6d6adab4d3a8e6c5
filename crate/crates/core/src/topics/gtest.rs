//! Log-likelihood keyness (g-test) for comparing an event's frequency
//! between two samples, and per-topic contrasts built on it.
//!
//! This is the two-cell corpus-comparison form: expected counts come from
//! pooling the samples, and G = 2 * sum O*ln(O/E) over the two observed
//! cells, with 0*ln(0/E) defined as 0. It differs numerically from the
//! four-cell independence test.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

use super::TopicAnnotation;

/// Chi-square critical value at p = 0.05 with one degree of freedom;
/// significance means G strictly above it.
pub const G_THRESHOLD: f64 = 3.841;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GTestResult {
    pub g: f64,
    pub significant: bool,
}

pub fn g_test(count_a: u64, count_b: u64, n_a: u64, n_b: u64) -> Result<GTestResult> {
    if n_a == 0 || n_b == 0 {
        return Err(Error::invalid("sample sizes must be positive"));
    }
    if count_a > n_a || count_b > n_b {
        return Err(Error::invalid("counts cannot exceed their sample sizes"));
    }
    let total = (count_a + count_b) as f64;
    let pooled = (n_a + n_b) as f64;
    let term = |count: u64, n: u64| -> f64 {
        if count == 0 {
            return 0.0;
        }
        let expected = n as f64 * total / pooled;
        count as f64 * (count as f64 / expected).ln()
    };
    let g = 2.0 * (term(count_a, n_a) + term(count_b, n_b));
    // equal proportions give a tiny negative residue in floating point
    let g = g.max(0.0);
    Ok(GTestResult {
        g,
        significant: g > G_THRESHOLD,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    SampleA,
    SampleB,
    Equal,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::SampleA => "a",
            Direction::SampleB => "b",
            Direction::Equal => "equal",
        }
    }
}

/// Per-topic contingency and test outcome for one contrast.
#[derive(Debug, Clone)]
pub struct ContrastResult {
    pub topic: usize,
    pub count_a: u64,
    pub count_b: u64,
    pub n_a: u64,
    pub n_b: u64,
    pub g: f64,
    pub significant: bool,
    pub direction: Direction,
}

/// Contrast topic occurrence between two disjoint document samples.
///
/// A topic "occurs" in a document when the annotation lists it; counts are
/// document counts. Results come back sorted by G descending.
pub fn contrast_samples(
    annotations: &[TopicAnnotation],
    topic_count: usize,
    sample_a: &BTreeSet<String>,
    sample_b: &BTreeSet<String>,
) -> Result<Vec<ContrastResult>> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(Error::empty("both samples must be non-empty"));
    }
    if !sample_a.is_disjoint(sample_b) {
        return Err(Error::invalid("samples must be disjoint"));
    }
    let mut counts_a = vec![0u64; topic_count];
    let mut counts_b = vec![0u64; topic_count];
    let mut seen_a = 0u64;
    let mut seen_b = 0u64;
    for ann in annotations {
        let counts = if sample_a.contains(&ann.doc_id) {
            seen_a += 1;
            &mut counts_a
        } else if sample_b.contains(&ann.doc_id) {
            seen_b += 1;
            &mut counts_b
        } else {
            continue;
        };
        for &t in &ann.topics {
            if t < topic_count {
                counts[t] += 1;
            }
        }
    }
    if seen_a != sample_a.len() as u64 || seen_b != sample_b.len() as u64 {
        return Err(Error::invalid(
            "annotations do not cover every document in the samples",
        ));
    }
    let n_a = sample_a.len() as u64;
    let n_b = sample_b.len() as u64;
    let mut results = Vec::with_capacity(topic_count);
    for topic in 0..topic_count {
        let t = g_test(counts_a[topic], counts_b[topic], n_a, n_b)?;
        let prop_a = counts_a[topic] as f64 / n_a as f64;
        let prop_b = counts_b[topic] as f64 / n_b as f64;
        let direction = if prop_a > prop_b {
            Direction::SampleA
        } else if prop_b > prop_a {
            Direction::SampleB
        } else {
            Direction::Equal
        };
        results.push(ContrastResult {
            topic,
            count_a: counts_a[topic],
            count_b: counts_b[topic],
            n_a,
            n_b,
            g: t.g,
            significant: t.significant,
            direction,
        });
    }
    results.sort_by(|x, y| {
        y.g.partial_cmp(&x.g)
            .expect("G is finite")
            .then_with(|| x.topic.cmp(&y.topic))
    });
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        // 30/100 vs 10/100: E = 20 each, G = 2(30 ln 1.5 + 10 ln 0.5)
        let r = g_test(30, 10, 100, 100).unwrap();
        assert!((r.g - 10.46496).abs() < 1e-4, "g = {}", r.g);
        assert!(r.significant);
    }

    #[test]
    fn equal_proportions_give_zero() {
        let r = g_test(15, 30, 100, 200).unwrap();
        assert_eq!(r.g, 0.0);
        assert!(!r.significant);
        let r = g_test(0, 0, 50, 50).unwrap();
        assert_eq!(r.g, 0.0);
        assert!(!r.significant);
    }

    #[test]
    fn swapping_samples_preserves_g() {
        let a = g_test(37, 11, 120, 90).unwrap();
        let b = g_test(11, 37, 90, 120).unwrap();
        assert!((a.g - b.g).abs() < 1e-12);
    }

    #[test]
    fn threshold_is_exactly_3_841() {
        // significance flips strictly above the critical value
        assert!(!g_test(0, 0, 10, 10).unwrap().significant);
        // craft a contingency just over the line and one at zero
        let over = g_test(20, 5, 100, 100).unwrap();
        assert!(over.g > G_THRESHOLD && over.significant);
    }

    #[test]
    fn monotone_in_count_divergence() {
        // fixed n_a = n_b and count_b: G grows as count_a moves away
        let base = 10u64;
        let mut prev = g_test(base, base, 100, 100).unwrap().g;
        for count_a in base + 1..=40 {
            let g = g_test(count_a, base, 100, 100).unwrap().g;
            assert!(g >= prev, "G fell from {prev} to {g} at count_a={count_a}");
            prev = g;
        }
    }

    #[test]
    fn invalid_contingencies_rejected() {
        assert!(g_test(5, 0, 0, 10).is_err());
        assert!(g_test(11, 0, 10, 10).is_err());
    }

    fn ann(id: &str, topics: &[usize]) -> TopicAnnotation {
        TopicAnnotation {
            doc_id: id.to_string(),
            topics: topics.to_vec(),
            threshold: 0.1,
        }
    }

    fn ids(prefix: &str, n: usize) -> BTreeSet<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    #[test]
    fn contrast_detects_planted_difference() {
        // topic 0 in 30/100 of sample a and 10/100 of sample b; topic 1
        // balanced
        let mut annotations = Vec::new();
        for i in 0..100 {
            let mut topics = vec![1];
            if i < 30 {
                topics.push(0);
            }
            annotations.push(ann(&format!("a{i}"), &topics));
        }
        for i in 0..100 {
            let mut topics = vec![1];
            if i < 10 {
                topics.push(0);
            }
            annotations.push(ann(&format!("b{i}"), &topics));
        }
        let results = contrast_samples(&annotations, 2, &ids("a", 100), &ids("b", 100)).unwrap();
        assert_eq!(results[0].topic, 0); // sorted by G descending
        assert!(results[0].significant);
        assert_eq!(results[0].direction, Direction::SampleA);
        assert!(!results[1].significant);
        assert_eq!(results[1].direction, Direction::Equal);
    }

    #[test]
    fn identical_samples_show_nothing() {
        let mut annotations = Vec::new();
        for i in 0..50 {
            let topics = if i % 2 == 0 { vec![0] } else { vec![1] };
            annotations.push(ann(&format!("a{i}"), &topics));
            annotations.push(ann(&format!("b{i}"), &topics));
        }
        let results = contrast_samples(&annotations, 2, &ids("a", 50), &ids("b", 50)).unwrap();
        assert!(results.iter().all(|r| !r.significant));
        assert!(results.iter().all(|r| r.g == 0.0));
    }

    #[test]
    fn empty_or_overlapping_samples_rejected() {
        let annotations = vec![ann("a0", &[0]), ann("b0", &[0])];
        assert!(contrast_samples(&annotations, 1, &BTreeSet::new(), &ids("b", 1)).is_err());
        let overlap: BTreeSet<String> = ["a0".to_string()].into();
        assert!(contrast_samples(&annotations, 1, &overlap, &overlap).is_err());
    }

    #[test]
    fn uncovered_samples_rejected() {
        let annotations = vec![ann("a0", &[0])];
        assert!(contrast_samples(&annotations, 1, &ids("a", 1), &ids("b", 1)).is_err());
    }
}
