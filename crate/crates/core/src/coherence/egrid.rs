//! Entity-grid local coherence: grid construction, the role-transition
//! model, and the sentence-permutation discrimination test.
//!
//! Role assignment is a deterministic heuristic over the bundled tagger:
//! in each sentence the first noun before the first verb is the subject,
//! the first noun after it is the object, every other noun mention is
//! "other". Entities are exact-string noun matches. The heuristic replaces
//! a parser; the transition machinery and the discrimination protocol are
//! the contract.

use std::collections::HashMap;

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, shuffle};
use crate::tag::{PosTag, Tagger};

/// Grid cell: the syntactic role of an entity in a sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    /// Subject mention.
    S,
    /// Object mention.
    O,
    /// Any other mention.
    X,
    /// Entity absent from the sentence.
    Absent,
}

pub const ROLES: [Role; 4] = [Role::S, Role::O, Role::X, Role::Absent];

impl Role {
    pub fn symbol(self) -> char {
        match self {
            Role::S => 'S',
            Role::O => 'O',
            Role::X => 'X',
            Role::Absent => '-',
        }
    }

    fn id(self) -> usize {
        match self {
            Role::S => 0,
            Role::O => 1,
            Role::X => 2,
            Role::Absent => 3,
        }
    }
}

/// Entities (rows) by sentences (columns) with role-valued cells.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityGrid {
    pub doc_id: String,
    pub entities: Vec<String>,
    rows: Vec<Vec<Role>>,
    sentence_count: usize,
}

impl EntityGrid {
    pub fn rows(&self) -> &[Vec<Role>] {
        &self.rows
    }

    pub fn row(&self, entity: &str) -> Option<&[Role]> {
        self.entities
            .iter()
            .position(|e| e == entity)
            .map(|i| self.rows[i].as_slice())
    }

    pub fn sentence_count(&self) -> usize {
        self.sentence_count
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Build the grid for one document using the bundled tagger.
pub fn build_entity_grid(doc: &Document) -> EntityGrid {
    let tagger = Tagger::bundled();
    let n_sentences = doc.sentences().len();
    let mut entities: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut rows: Vec<Vec<Role>> = Vec::new();

    for (s_idx, sentence) in doc.sentences().iter().enumerate() {
        let tags: Vec<PosTag> = sentence.iter().map(|t| tagger.tag(t)).collect();
        let first_verb = tags.iter().position(|&t| t == PosTag::Verb);
        let noun_positions: Vec<usize> = tags
            .iter()
            .enumerate()
            .filter(|(_, &t)| t == PosTag::Noun)
            .map(|(i, _)| i)
            .collect();
        let subject = first_verb.and_then(|v| noun_positions.iter().copied().find(|&p| p < v));
        let object = first_verb.and_then(|v| noun_positions.iter().copied().find(|&p| p > v));

        for &pos in &noun_positions {
            let role = if Some(pos) == subject {
                Role::S
            } else if Some(pos) == object {
                Role::O
            } else {
                Role::X
            };
            let key = sentence[pos].clone();
            let row = match index.get(&key) {
                Some(&r) => r,
                None => {
                    index.insert(key.clone(), entities.len());
                    entities.push(key);
                    rows.push(vec![Role::Absent; n_sentences]);
                    rows.len() - 1
                }
            };
            // S > O > X when an entity is mentioned more than once
            if role < rows[row][s_idx] {
                rows[row][s_idx] = role;
            }
        }
    }

    EntityGrid {
        doc_id: doc.id.clone(),
        entities,
        rows,
        sentence_count: n_sentences,
    }
}

/// Role-transition model: P(role | previous h roles), additively smoothed.
#[derive(Debug, Clone)]
pub struct EgridModel {
    history: usize,
    smoothing: f64,
    counts: HashMap<Vec<Role>, [u64; 4]>,
}

impl EgridModel {
    pub fn history(&self) -> usize {
        self.history
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    /// P(role | history); unseen histories fall back to the smoothing
    /// floor (uniform when nothing was observed).
    pub fn prob(&self, history: &[Role], role: Role) -> f64 {
        debug_assert_eq!(history.len(), self.history);
        let (count, total) = match self.counts.get(history) {
            Some(cells) => (cells[role.id()] as f64, cells.iter().sum::<u64>() as f64),
            None => (0.0, 0.0),
        };
        let denom = total + 4.0 * self.smoothing;
        if denom == 0.0 {
            return 0.25;
        }
        (count + self.smoothing) / denom
    }

    pub fn observed_histories(&self) -> impl Iterator<Item = &Vec<Role>> {
        self.counts.keys()
    }
}

/// Iterate the (history, next-role) windows of one grid row, left-padded
/// with h absent cells; a row of m sentences yields exactly m windows.
fn windows(row: &[Role], h: usize) -> impl Iterator<Item = (Vec<Role>, Role)> + '_ {
    let mut padded = vec![Role::Absent; h];
    padded.extend_from_slice(row);
    (0..row.len()).map(move |i| (padded[i..i + h].to_vec(), padded[i + h]))
}

/// Train the transition model over every row of every grid.
pub fn train_egrid(grids: &[EntityGrid], h: usize, smoothing: f64) -> Result<EgridModel> {
    if h < 1 {
        return Err(Error::invalid("history length must be at least 1"));
    }
    if smoothing < 0.0 || !smoothing.is_finite() {
        return Err(Error::invalid("smoothing must be a finite value >= 0"));
    }
    if grids.iter().all(|g| g.is_empty()) {
        return Err(Error::empty("no non-empty grids to train on"));
    }
    let mut counts: HashMap<Vec<Role>, [u64; 4]> = HashMap::new();
    for grid in grids {
        for row in grid.rows() {
            for (history, next) in windows(row, h) {
                counts.entry(history).or_insert([0; 4])[next.id()] += 1;
            }
        }
    }
    Ok(EgridModel {
        history: h,
        smoothing,
        counts,
    })
}

/// Mean log-probability over all transitions of all rows; 0 with the
/// `empty` flag set when the grid has no rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridScore {
    pub value: f64,
    pub transitions: usize,
    pub empty: bool,
}

pub fn score_grid(model: &EgridModel, grid: &EntityGrid) -> GridScore {
    let mut sum = 0.0;
    let mut n = 0usize;
    for row in grid.rows() {
        for (history, next) in windows(row, model.history()) {
            sum += model.prob(&history, next).ln();
            n += 1;
        }
    }
    if n == 0 {
        GridScore {
            value: 0.0,
            transitions: 0,
            empty: true,
        }
    } else {
        GridScore {
            value: sum / n as f64,
            transitions: n,
            empty: false,
        }
    }
}

/// Draw `n_perm` uniform sentence-order permutations from one seeded
/// stream.
pub fn sample_permutations(n_sentences: usize, n_perm: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = rng_from_seed(seed);
    (0..n_perm)
        .map(|_| {
            let mut order: Vec<usize> = (0..n_sentences).collect();
            shuffle(&mut order, &mut rng);
            order
        })
        .collect()
}

/// Reorder a document's sentences; the grid of the result is rebuilt from
/// scratch by the caller.
pub fn permute_document(doc: &Document, order: &[usize]) -> Document {
    let sentences: Vec<Vec<String>> = order
        .iter()
        .map(|&i| doc.sentences()[i].clone())
        .collect();
    Document::from_sentences(
        doc.id.clone(),
        doc.author_id.clone(),
        doc.label.clone(),
        doc.source.clone(),
        sentences,
    )
    .expect("permutation preserves non-emptiness")
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DiscriminationOutcome {
    pub wins: usize,
    pub ties: usize,
    pub losses: usize,
}

impl DiscriminationOutcome {
    pub fn pairs(&self) -> usize {
        self.wins + self.ties + self.losses
    }
}

/// Score the original document against `n_perm` random sentence
/// permutations: win when the original scores strictly higher, tie on
/// exact equality.
pub fn discrimination_test(
    model: &EgridModel,
    doc: &Document,
    n_perm: usize,
    seed: u64,
) -> DiscriminationOutcome {
    let original = score_grid(model, &build_entity_grid(doc));
    let mut outcome = DiscriminationOutcome::default();
    for order in sample_permutations(doc.sentences().len(), n_perm, seed) {
        let permuted = permute_document(doc, &order);
        let score = score_grid(model, &build_entity_grid(&permuted));
        if original.value > score.value {
            outcome.wins += 1;
        } else if original.value == score.value {
            outcome.ties += 1;
        } else {
            outcome.losses += 1;
        }
    }
    outcome
}

/// Run the discrimination test over a corpus with per-document seeds
/// derived as `seed + document index`.
pub fn run_discrimination(
    model: &EgridModel,
    docs: &[Document],
    n_perm: usize,
    seed: u64,
) -> Vec<(String, DiscriminationOutcome)> {
    docs.iter()
        .enumerate()
        .map(|(i, doc)| {
            let doc_seed = seed.wrapping_add(i as u64);
            (
                doc.id.clone(),
                discrimination_test(model, doc, n_perm, doc_seed),
            )
        })
        .collect()
}

/// Pooled discrimination quality. Ties count as failures for accuracy and
/// are excluded from precision, which lets accuracy fall below the
/// F-score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscriminationReport {
    pub docs: usize,
    pub pairs: usize,
    pub wins: usize,
    pub ties: usize,
    pub losses: usize,
    pub accuracy: f64,
    pub f_score: f64,
    /// Set when no pair was decided (all ties), in which case the F-score
    /// is reported as 0.
    pub degenerate: bool,
}

pub fn discrimination_report(
    outcomes: &[(String, DiscriminationOutcome)],
) -> Result<DiscriminationReport> {
    let wins: usize = outcomes.iter().map(|(_, o)| o.wins).sum();
    let ties: usize = outcomes.iter().map(|(_, o)| o.ties).sum();
    let losses: usize = outcomes.iter().map(|(_, o)| o.losses).sum();
    let pairs = wins + ties + losses;
    if pairs == 0 {
        return Err(Error::empty("no permutation pairs to report on"));
    }
    let accuracy = wins as f64 / pairs as f64;
    let decided = wins + losses;
    let (f_score, degenerate) = if decided == 0 || wins == 0 {
        (0.0, decided == 0)
    } else {
        let precision = wins as f64 / decided as f64;
        let recall = wins as f64 / pairs as f64;
        (2.0 * precision * recall / (precision + recall), false)
    };
    Ok(DiscriminationReport {
        docs: outcomes.len(),
        pairs,
        wins,
        ties,
        losses,
        accuracy,
        f_score,
        degenerate,
    })
}
