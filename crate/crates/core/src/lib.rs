//! storyscope: corpus analytics for contrasting collections of personal
//! narratives.
//!
//! The toolkit compares two labeled corpora (for example dream reports
//! against real-life stories) along three axes:
//!
//! * supervised genre classification over binary n-gram features, with
//!   author-grouped cross-validation and model introspection;
//! * LDA topic modeling by collapsed Gibbs sampling, with significance-tested
//!   topic contrasts between sub-samples;
//! * discourse-coherence profiling via connective counts and an entity-grid
//!   permutation-discrimination test.
//!
//! Everything is deterministic given a seed, and every stage emits
//! plot-ready TSV reports.

pub mod classify;
pub mod coherence;
pub mod config;
pub mod corpus;
pub mod data;
pub mod features;
pub mod pipeline;
pub mod report;
pub mod rng;
pub mod tag;
pub mod topics;

mod error;

pub use error::{Error, Result};

/// Toolkit version recorded in report headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
