//! Discourse-coherence profiling: connective frequency profiles and the
//! entity-grid permutation-discrimination test.

mod egrid;
mod markers;

pub use egrid::{
    build_entity_grid, discrimination_report, discrimination_test, permute_document,
    run_discrimination, sample_permutations, score_grid, train_egrid, DiscriminationOutcome,
    DiscriminationReport, EgridModel, EntityGrid, GridScore, Role, ROLES,
};
pub use markers::{count_markers, MarkerLexicon, MarkerProfile};
