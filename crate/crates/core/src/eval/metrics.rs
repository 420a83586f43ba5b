//! Run metrics and their JSON-lines serialization.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::ensemble::ChunkReport;
use crate::error::{Error, Result};

pub use crate::ensemble::count_parameters;

/// One training chunk. `cr` is the prequential hit rate on the chunk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkMetrics {
    /// Stamp (hold-out) or fold (CV) the chunk belongs to.
    pub unit: usize,
    pub chunk: usize,
    /// Position of the chunk's first sample in the source stream.
    pub stream_pos: usize,
    pub samples: usize,
    pub cr: f64,
    pub fr: usize,
    pub bc: usize,
    pub np: usize,
    pub ts: usize,
    pub drifts: usize,
    pub warnings: usize,
    pub merges: usize,
    pub theta_start: f64,
    pub theta_end: f64,
    pub mask: Vec<u8>,
    pub feature_scores: Vec<f64>,
}

impl ChunkMetrics {
    pub fn from_report(unit: usize, stream_pos: usize, r: &ChunkReport) -> Self {
        ChunkMetrics {
            unit,
            chunk: r.index,
            stream_pos,
            samples: r.samples,
            cr: if r.samples == 0 {
                0.0
            } else {
                r.correct as f64 / r.samples as f64
            },
            fr: r.rules,
            bc: r.members,
            np: r.parameters,
            ts: r.accepted,
            drifts: r.drifts,
            warnings: r.warnings,
            merges: r.merges,
            theta_start: r.theta_start,
            theta_end: r.theta_end,
            mask: r.mask.clone(),
            feature_scores: r.feature_scores.clone(),
        }
    }
}

/// Scores of one stamp or fold, taken at test time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitMetrics {
    pub unit: usize,
    pub cr: f64,
    pub fr: usize,
    pub bc: usize,
    pub np: usize,
    pub ts: usize,
    pub trained: usize,
    pub tested: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub mode: String,
    pub cr: f64,
    pub cr_std: f64,
    pub fr: f64,
    pub fr_std: f64,
    pub bc: f64,
    pub bc_std: f64,
    pub np: f64,
    pub np_std: f64,
    /// Mean accepted training samples per unit.
    pub ts: f64,
    pub ts_std: f64,
    /// Accepted samples over all training samples offered.
    pub ts_frac: f64,
    /// Wall-clock seconds; kept out of the metrics file so that it stays
    /// reproducible.
    #[serde(skip)]
    pub rt: f64,
    pub samples: usize,
    pub drifts: usize,
    pub merges: usize,
    pub units: Vec<UnitMetrics>,
    #[serde(skip)]
    pub chunks: Vec<ChunkMetrics>,
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl RunMetrics {
    pub fn aggregate(mode: &str, units: Vec<UnitMetrics>, chunks: Vec<ChunkMetrics>, samples: usize) -> Self {
        let col = |f: &dyn Fn(&UnitMetrics) -> f64| mean_std(&units.iter().map(f).collect::<Vec<_>>());
        let (cr, cr_std) = col(&|u| u.cr);
        let (fr, fr_std) = col(&|u| u.fr as f64);
        let (bc, bc_std) = col(&|u| u.bc as f64);
        let (np, np_std) = col(&|u| u.np as f64);
        let (ts, ts_std) = col(&|u| u.ts as f64);
        let offered: usize = units.iter().map(|u| u.trained).sum();
        let accepted: usize = units.iter().map(|u| u.ts).sum();
        RunMetrics {
            mode: mode.to_string(),
            cr,
            cr_std,
            fr,
            fr_std,
            bc,
            bc_std,
            np,
            np_std,
            ts,
            ts_std,
            ts_frac: if offered == 0 {
                0.0
            } else {
                accepted as f64 / offered as f64
            },
            rt: 0.0,
            samples,
            drifts: chunks.iter().map(|c| c.drifts).sum(),
            merges: chunks.iter().map(|c| c.merges).sum(),
            units,
            chunks,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Record {
    Chunk(ChunkMetrics),
    Summary(RunMetrics),
}

/// One JSON record per chunk followed by the summary record.
pub fn write_metrics<W: Write>(mut w: W, m: &RunMetrics) -> Result<()> {
    for c in &m.chunks {
        serde_json::to_writer(&mut w, &Record::Chunk(c.clone()))?;
        w.write_all(b"\n")?;
    }
    serde_json::to_writer(&mut w, &Record::Summary(m.clone()))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_metrics<R: BufRead>(r: R) -> Result<RunMetrics> {
    let mut chunks = Vec::new();
    let mut summary = None;
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i as u64 + 1,
            msg: e.to_string(),
        })?;
        match rec {
            Record::Chunk(c) => chunks.push(c),
            Record::Summary(s) => summary = Some(s),
        }
    }
    let mut m = summary.ok_or_else(|| Error::InsufficientData("metrics file has no summary record".into()))?;
    m.chunks = chunks;
    Ok(m)
}
