//! Alternating train/test blocks over a single pass of the stream.

use std::time::Instant;

use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::stream::{DataChunk, Sample, StreamConfig};

use super::metrics::{ChunkMetrics, RunMetrics, UnitMetrics};
use super::{EvalMode, EvalProtocol, Learner};

/// Hold-out run of a fresh ensemble built from `cfg`.
pub fn run_holdout<I>(stream: I, cfg: &StreamConfig, protocol: &EvalProtocol) -> Result<RunMetrics>
where
    I: IntoIterator<Item = Result<Sample>>,
{
    let start = Instant::now();
    let mut ens = Ensemble::new(cfg.clone())?;
    let mut m = run_holdout_with(stream, &mut ens, protocol, cfg.chunk_size)?;
    m.rt = start.elapsed().as_secs_f64();
    Ok(m)
}

fn take_block<I>(it: &mut I, n: usize, consumed: &mut usize, stamp: usize, stamps: usize) -> Result<Vec<Sample>>
where
    I: Iterator<Item = Result<Sample>>,
{
    let mut block = Vec::with_capacity(n);
    for s in it.by_ref().take(n) {
        block.push(s?);
        *consumed += 1;
    }
    if block.len() < n {
        return Err(Error::StreamExhausted {
            stamp,
            stamps,
            samples: *consumed,
        });
    }
    Ok(block)
}

/// Hold-out run of any learner. Test blocks are scored on a frozen learner
/// and its state hash is checked before and after scoring.
pub fn run_holdout_with<I, L>(
    stream: I,
    learner: &mut L,
    protocol: &EvalProtocol,
    chunk_size: usize,
) -> Result<RunMetrics>
where
    I: IntoIterator<Item = Result<Sample>>,
    L: Learner,
{
    protocol.validate()?;
    if protocol.mode != EvalMode::Holdout {
        return Err(Error::Config("protocol is not a hold-out protocol".into()));
    }
    if chunk_size == 0 {
        return Err(Error::Config("chunk size must be at least 1".into()));
    }
    let mut it = stream.into_iter();
    let mut consumed = 0usize;
    let mut trained_total = 0u64;
    let mut chunk_index = 0usize;
    let mut units = Vec::with_capacity(protocol.stamps);
    let mut chunks = Vec::new();
    let base_ingested = learner.ingested();

    for stamp in 0..protocol.stamps {
        let train_pos = consumed;
        let train = take_block(&mut it, protocol.train_per_stamp, &mut consumed, stamp, protocol.stamps)?;
        let mut accepted = 0;
        let mut last = None;
        for (k, block) in train.chunks(chunk_size).enumerate() {
            let chunk = DataChunk {
                index: chunk_index,
                samples: block.to_vec(),
            };
            let report = learner.train_chunk(&chunk)?;
            chunks.push(ChunkMetrics::from_report(stamp, train_pos + k * chunk_size, &report));
            accepted += report.accepted;
            chunk_index += 1;
            last = Some(report);
        }
        trained_total += train.len() as u64;
        if learner.ingested() - base_ingested != trained_total {
            return Err(Error::Invariant(
                "training samples were not ingested exactly once".into(),
            ));
        }

        let test = take_block(&mut it, protocol.test_per_stamp, &mut consumed, stamp, protocol.stamps)?;
        let before = learner.state_hash()?;
        let hits = test
            .iter()
            .filter(|s| s.label.is_some() && learner.predict_class(&s.x) == s.label)
            .count();
        if learner.state_hash()? != before {
            return Err(Error::Invariant("scoring a test block changed the model".into()));
        }
        let last = last.unwrap_or_default();
        units.push(UnitMetrics {
            unit: stamp,
            cr: hits as f64 / test.len() as f64,
            fr: last.rules,
            bc: last.members,
            np: last.parameters,
            ts: accepted,
            trained: train.len(),
            tested: test.len(),
        });
    }
    Ok(RunMetrics::aggregate("holdout", units, chunks, consumed))
}
