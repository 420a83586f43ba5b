//! Evaluation harness: periodic hold-out and contiguous k-fold CV.

pub mod cv;
pub mod holdout;
pub mod metrics;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::ensemble::{ChunkReport, Ensemble};
use crate::error::{Error, Result};
use crate::stream::DataChunk;

pub use cv::{fold_bounds, run_cv, run_cv_with};
pub use holdout::{run_holdout, run_holdout_with};
pub use metrics::{count_parameters, mean_std, read_metrics, write_metrics, ChunkMetrics, RunMetrics, UnitMetrics};

/// What the harness needs from a stream learner.
pub trait Learner {
    fn train_chunk(&mut self, chunk: &DataChunk) -> Result<ChunkReport>;
    /// 1-based class for a raw input, `None` when no prediction is possible.
    fn predict_class(&self, x: &DVector<f64>) -> Option<usize>;
    /// Digest of the full learner state.
    fn state_hash(&self) -> Result<String>;
    /// Training samples ingested so far.
    fn ingested(&self) -> u64;
}

impl Learner for Ensemble {
    fn train_chunk(&mut self, chunk: &DataChunk) -> Result<ChunkReport> {
        Ensemble::train_chunk(self, chunk)
    }

    fn predict_class(&self, x: &DVector<f64>) -> Option<usize> {
        self.predict_raw(x).ok().map(|p| p.class)
    }

    fn state_hash(&self) -> Result<String> {
        self.snapshot_hash()
    }

    fn ingested(&self) -> u64 {
        self.samples_ingested
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    Holdout,
    Cv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalProtocol {
    pub mode: EvalMode,
    pub folds: usize,
    pub stamps: usize,
    pub train_per_stamp: usize,
    pub test_per_stamp: usize,
}

impl EvalProtocol {
    pub fn holdout(stamps: usize, train_per_stamp: usize, test_per_stamp: usize) -> Self {
        EvalProtocol {
            mode: EvalMode::Holdout,
            folds: 10,
            stamps,
            train_per_stamp,
            test_per_stamp,
        }
    }

    pub fn cv(folds: usize) -> Self {
        EvalProtocol {
            mode: EvalMode::Cv,
            folds,
            stamps: 0,
            train_per_stamp: 0,
            test_per_stamp: 0,
        }
    }

    /// Samples a hold-out run consumes.
    pub fn budget(&self) -> usize {
        self.stamps * (self.train_per_stamp + self.test_per_stamp)
    }

    pub fn validate(&self) -> Result<()> {
        match self.mode {
            EvalMode::Holdout => {
                if self.stamps == 0 || self.train_per_stamp == 0 || self.test_per_stamp == 0 {
                    return Err(Error::Config("hold-out needs stamps, train and test sizes >= 1".into()));
                }
            }
            EvalMode::Cv => {
                if self.folds < 2 {
                    return Err(Error::Config("cross-validation needs at least 2 folds".into()));
                }
            }
        }
        Ok(())
    }
}
