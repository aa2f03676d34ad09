//! Score differences, Diebold-Mariano tests, preference tables and the
//! bin/interval convergence experiments.

mod convergence;
mod dm;
pub mod experiments;
mod table;

pub use convergence::{
    convergence_experiment_spatial, convergence_experiment_temporal, corrected_spatial_difference,
    corrected_temporal_difference, ConvergenceTable,
};
pub use dm::{
    avg_score_difference, dm_test, dm_test_with, Decision, DmResult, DmSpec, ScoreDifference, ScoreSeries, Sidedness,
};
pub use table::{pair_tests, preference_table, preference_table_from_scores, PairTest, PreferenceTable, RepScores};
