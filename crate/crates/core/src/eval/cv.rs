//! Contiguous k-fold cross-validation; folds run in parallel.

use std::ops::Range;
use std::time::Instant;

use rayon::prelude::*;

use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::stream::{chunks, Sample, StreamConfig};

use super::metrics::{ChunkMetrics, RunMetrics, UnitMetrics};
use super::Learner;

/// Index range of each contiguous bin; the first `n % folds` bins get one
/// extra sample.
pub fn fold_bounds(n: usize, folds: usize) -> Vec<Range<usize>> {
    let (base, extra) = (n / folds, n % folds);
    let mut start = 0;
    (0..folds)
        .map(|k| {
            let len = base + (k < extra) as usize;
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

pub fn run_cv(data: &[Sample], cfg: &StreamConfig, folds: usize) -> Result<RunMetrics> {
    cfg.validate()?;
    run_cv_with(data, folds, cfg.chunk_size, || Ensemble::new(cfg.clone()))
}

/// CV with learners built by `make`; every fold owns its learner.
pub fn run_cv_with<L, F>(data: &[Sample], folds: usize, chunk_size: usize, make: F) -> Result<RunMetrics>
where
    L: Learner,
    F: Fn() -> Result<L> + Sync,
{
    if folds < 2 {
        return Err(Error::Config("cross-validation needs at least 2 folds".into()));
    }
    if data.len() < folds {
        return Err(Error::InsufficientData(format!(
            "{} samples cannot fill {folds} folds",
            data.len()
        )));
    }
    let start = Instant::now();
    let bins = fold_bounds(data.len(), folds);
    let results: Vec<(UnitMetrics, Vec<ChunkMetrics>)> = bins
        .par_iter()
        .enumerate()
        .map(|(k, test)| run_fold(data, k, test.clone(), chunk_size, &make))
        .collect::<Result<_>>()?;
    let (units, chunk_lists): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let mut m = RunMetrics::aggregate("cv", units, chunk_lists.concat(), data.len());
    m.rt = start.elapsed().as_secs_f64();
    Ok(m)
}

fn run_fold<L, F>(
    data: &[Sample],
    k: usize,
    test: Range<usize>,
    chunk_size: usize,
    make: &F,
) -> Result<(UnitMetrics, Vec<ChunkMetrics>)>
where
    L: Learner,
    F: Fn() -> Result<L>,
{
    let mut learner = make()?;
    let train: Vec<(usize, Sample)> = data
        .iter()
        .enumerate()
        .filter(|(i, _)| !test.contains(i))
        .map(|(i, s)| (i, s.clone()))
        .collect();
    let positions: Vec<usize> = train.iter().map(|(i, _)| *i).collect();
    let mut records = Vec::new();
    let mut accepted = 0;
    let mut last = None;
    for chunk in chunks(train.into_iter().map(|(_, s)| s), chunk_size) {
        let pos = positions[chunk.index * chunk_size];
        let report = learner.train_chunk(&chunk)?;
        accepted += report.accepted;
        records.push(ChunkMetrics::from_report(k, pos, &report));
        last = Some(report);
    }
    let before = learner.state_hash()?;
    let hits = data[test.clone()]
        .iter()
        .filter(|s| s.label.is_some() && learner.predict_class(&s.x) == s.label)
        .count();
    if learner.state_hash()? != before {
        return Err(Error::Invariant("scoring a test fold changed the model".into()));
    }
    let last = last.unwrap_or_default();
    let unit = UnitMetrics {
        unit: k,
        cr: hits as f64 / test.len() as f64,
        fr: last.rules,
        bc: last.members,
        np: last.parameters,
        ts: accepted,
        trained: positions.len(),
        tested: test.len(),
    };
    Ok((unit, records))
}
