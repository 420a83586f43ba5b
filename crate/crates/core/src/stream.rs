//! Shared stream types: samples, chunks, the run configuration and the
//! running standardizer applied once at ingestion.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floor on the running standard deviation so constant features map to 0.
pub const STD_FLOOR: f64 = 1e-8;

/// One observation. `label` is a 1-based class index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: DVector<f64>,
    pub label: Option<usize>,
    /// Active-feature mask, entries exactly 0.0 or 1.0.
    pub mask: DVector<f64>,
}

impl Sample {
    pub fn new(x: Vec<f64>, label: Option<usize>) -> Self {
        let n = x.len();
        Sample {
            x: DVector::from_vec(x),
            label,
            mask: DVector::from_element(n, 1.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataChunk {
    pub index: usize,
    pub samples: Vec<Sample>,
}

impl DataChunk {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Welford running mean/variance, updated with every ingested sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunningStandardizer {
    count: u64,
    mean: DVector<f64>,
    m2: DVector<f64>,
}

impl RunningStandardizer {
    pub fn new(dim: usize) -> Self {
        RunningStandardizer {
            count: 0,
            mean: DVector::zeros(dim),
            m2: DVector::zeros(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// Unbiased variance estimate `m2 / max(count - 1, 1)`.
    pub fn variance(&self) -> DVector<f64> {
        let denom = self.count.saturating_sub(1).max(1) as f64;
        self.m2.map(|v| v / denom)
    }

    /// Folds `x` into the running statistics, then returns its standardized form.
    pub fn standardize(&mut self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check(x)?;
        self.count += 1;
        let n = self.count as f64;
        for j in 0..x.len() {
            let delta = x[j] - self.mean[j];
            self.mean[j] += delta / n;
            self.m2[j] += delta * (x[j] - self.mean[j]);
        }
        Ok(self.apply(x))
    }

    /// Standardizes with the current statistics without updating them.
    pub fn transform(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check(x)?;
        Ok(self.apply(x))
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let var = self.variance();
        DVector::from_fn(x.len(), |j, _| (x[j] - self.mean[j]) / var[j].sqrt().max(STD_FLOOR))
    }

    fn check(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseKind {
    /// Diagonal dispersion matrices.
    #[default]
    AxisParallel,
    /// Full inverse covariance matrices.
    Multivariate,
}

/// Top-level run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamConfig {
    /// Input dimension.
    pub dim: usize,
    pub n_classes: usize,
    pub chunk_size: usize,
    /// Initial conflict threshold.
    pub theta: f64,
    /// Relative merge threshold.
    pub delta_rel: f64,
    /// Absolute merge threshold; overrides `delta_rel` when set.
    pub delta_abs: Option<f64>,
    pub alpha_warn: f64,
    pub alpha_drift: f64,
    /// Penalty/reward factor for voting weights.
    pub penalty: f64,
    /// Number of features kept by online feature selection.
    pub ofs_b: usize,
    /// Accept only when both conflict measures are below the threshold.
    pub al_conjunction: bool,
    pub seed: u64,
    pub base_kind: BaseKind,
}

impl StreamConfig {
    pub fn new(dim: usize, n_classes: usize) -> Self {
        StreamConfig {
            dim,
            n_classes,
            chunk_size: 250,
            theta: 0.7,
            delta_rel: 0.02,
            delta_abs: None,
            alpha_warn: 0.005,
            alpha_drift: 0.001,
            penalty: 0.5,
            ofs_b: dim,
            al_conjunction: false,
            seed: 0,
            base_kind: BaseKind::AxisParallel,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.dim == 0 {
            return fail("input dimension must be at least 1");
        }
        if self.n_classes < 2 {
            return fail("at least two classes are required");
        }
        if self.chunk_size == 0 {
            return fail("chunk size must be at least 1");
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return fail("theta must lie in (0, 1]");
        }
        if !(self.delta_rel >= 0.0) {
            return fail("delta_rel must be non-negative");
        }
        if let Some(d) = self.delta_abs {
            if !(d >= 0.0) {
                return fail("delta_abs must be non-negative");
            }
        }
        let unit = |a: f64| a > 0.0 && a < 1.0;
        if !unit(self.alpha_warn) || !unit(self.alpha_drift) {
            return fail("significance levels must lie in (0, 1)");
        }
        if self.alpha_drift >= self.alpha_warn {
            return fail("alpha_drift must be smaller than alpha_warn");
        }
        if !unit(self.penalty) {
            return fail("penalty factor must lie in (0, 1)");
        }
        if self.ofs_b == 0 || self.ofs_b > self.dim {
            return fail("ofs_b must lie in [1, dim]");
        }
        Ok(())
    }
}

/// One-hot regression target for a 1-based label.
pub fn one_hot(label: usize, n_classes: usize) -> DVector<f64> {
    let mut t = DVector::zeros(n_classes);
    t[label - 1] = 1.0;
    t
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax(v: &DVector<f64>) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

/// Splits a sample source into consecutive chunks of `p` samples; the last
/// chunk may be shorter.
pub fn chunks<I>(source: I, p: usize) -> Chunks<I::IntoIter>
where
    I: IntoIterator<Item = Sample>,
{
    assert!(p >= 1, "chunk size must be at least 1");
    Chunks {
        inner: source.into_iter(),
        size: p,
        next_index: 0,
    }
}

pub struct Chunks<I> {
    inner: I,
    size: usize,
    next_index: usize,
}

impl<I: Iterator<Item = Sample>> Iterator for Chunks<I> {
    type Item = DataChunk;

    fn next(&mut self) -> Option<DataChunk> {
        let samples: Vec<Sample> = self.inner.by_ref().take(self.size).collect();
        if samples.is_empty() {
            return None;
        }
        let index = self.next_index;
        self.next_index += 1;
        Some(DataChunk { index, samples })
    }
}

/// Column-wise affine map of `[min, max]` onto `[lo, hi]`. Constant columns
/// map to the midpoint.
pub fn minmax_scale(x: &DMatrix<f64>, lo: f64, hi: f64) -> Result<DMatrix<f64>> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut out = x.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        let src = x.column(j);
        let (min, max) = (src.min(), src.max());
        if max > min {
            col.iter_mut()
                .for_each(|v| *v = lo + (*v - min) * (hi - lo) / (max - min));
        } else {
            col.fill(0.5 * (lo + hi));
        }
    }
    Ok(out)
}
