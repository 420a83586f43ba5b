//! Sample selection (active learning) and feature selection.

pub mod active;
pub mod ofs;

pub use active::{conflict_input, conflict_output, ActiveLearnParams, ActiveLearnState, ConflictScores, Decision};
pub use ofs::{apply_mask, feature_scores, ofs_step, FeatureMask, OfsParams};
