//! Evolving ensemble of fuzzy classifiers for drifting data streams.
//!
//! Members are evolving first-order TSK classifiers ([`pclass`]) combined
//! by a weighted vote ([`ensemble`]). A Hoeffding-bound drift detector adds
//! members, an output-redundancy test merges them, and the samples that are
//! labeled and the features that are used are chosen online ([`selection`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod datagen;
pub mod ensemble;
pub mod error;
pub mod eval;
pub mod pclass;
pub mod selection;
pub mod stream;

pub use ensemble::{ChunkReport, Ensemble, EnsembleMember, EnsembleParams, Prediction};
pub use error::{Error, Result};
pub use pclass::{FuzzyRule, GrowPruneParams, PClassModel};
pub use stream::{BaseKind, DataChunk, RunningStandardizer, Sample, StreamConfig};
