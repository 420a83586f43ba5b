//! SEA concepts: three uniform features on [0, 10], class 2 when
//! `x1 + x2` falls below the active threshold.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::Sample;

pub const SEA_FEATURES: usize = 3;
const SEA_RANGE: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeaConfig {
    pub n_total: usize,
    /// Threshold per concept; concepts switch at equally spaced points.
    pub thresholds: Vec<f64>,
    /// Target share of class 2; `None` keeps the natural class balance.
    pub minority_frac: Option<f64>,
    pub noise_frac: f64,
    pub seed: u64,
}

impl Default for SeaConfig {
    fn default() -> Self {
        SeaConfig {
            n_total: 100_000,
            thresholds: vec![4.0, 7.0, 4.0, 7.0],
            minority_frac: Some(0.25),
            noise_frac: 0.0,
            seed: 0,
        }
    }
}

impl SeaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thresholds.is_empty() {
            return Err(Error::Config("SEA needs at least one threshold".into()));
        }
        if self.n_total == 0 {
            return Err(Error::Config("SEA stream length must be positive".into()));
        }
        if let Some(f) = self.minority_frac {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::Config("minority fraction must lie in (0, 1)".into()));
            }
        }
        if !(0.0..1.0).contains(&self.noise_frac) {
            return Err(Error::Config("noise fraction must lie in [0, 1)".into()));
        }
        Ok(())
    }

    /// Sample indices at which the threshold changes.
    pub fn switch_points(&self) -> Vec<usize> {
        let k = self.thresholds.len();
        (1..k).map(|i| i * self.n_total / k).collect()
    }

    /// Threshold in effect at stream position `i`.
    pub fn threshold_at(&self, i: usize) -> f64 {
        let k = self.thresholds.len();
        let concept = (i * k / self.n_total).min(k - 1);
        self.thresholds[concept]
    }
}

/// `P(x1 + x2 < θ)` for independent uniforms on `[0, 10]`.
pub fn natural_minority_share(theta: f64) -> f64 {
    let r = SEA_RANGE;
    if theta <= 0.0 {
        0.0
    } else if theta <= r {
        theta * theta / (2.0 * r * r)
    } else if theta < 2.0 * r {
        1.0 - (2.0 * r - theta).powi(2) / (2.0 * r * r)
    } else {
        1.0
    }
}

/// Noise-free SEA label.
pub fn sea_label(x: &[f64], theta: f64) -> usize {
    if x[0] + x[1] < theta {
        2
    } else {
        1
    }
}

pub struct SeaStream {
    cfg: SeaConfig,
    rng: ChaCha8Rng,
    pos: usize,
}

/// Seeded SEA generator; validates the configuration first.
pub fn gen_sea(cfg: &SeaConfig) -> Result<SeaStream> {
    cfg.validate()?;
    Ok(SeaStream {
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        cfg: cfg.clone(),
        pos: 0,
    })
}

impl SeaStream {
    /// Acceptance probabilities for class-1 and class-2 candidates that
    /// bring the class-2 share to the configured fraction.
    fn acceptance(&self, theta: f64) -> (f64, f64) {
        let Some(f) = self.cfg.minority_frac else {
            return (1.0, 1.0);
        };
        let p2 = natural_minority_share(theta);
        if p2 <= 0.0 || p2 >= 1.0 {
            return (1.0, 1.0);
        }
        if p2 < f {
            (p2 * (1.0 - f) / (f * (1.0 - p2)), 1.0)
        } else {
            (1.0, f * (1.0 - p2) / (p2 * (1.0 - f)))
        }
    }
}

impl Iterator for SeaStream {
    type Item = Sample;

    fn next(&mut self) -> Option<Sample> {
        if self.pos >= self.cfg.n_total {
            return None;
        }
        let theta = self.cfg.threshold_at(self.pos);
        let (keep1, keep2) = self.acceptance(theta);
        let (x, mut label) = loop {
            let x: Vec<f64> = (0..SEA_FEATURES)
                .map(|_| self.rng.random_range(0.0..SEA_RANGE))
                .collect();
            let label = sea_label(&x, theta);
            let keep = if label == 1 { keep1 } else { keep2 };
            if keep >= 1.0 || self.rng.random_bool(keep) {
                break (x, label);
            }
        };
        if self.cfg.noise_frac > 0.0 && self.rng.random_bool(self.cfg.noise_frac) {
            label = 3 - label;
        }
        self.pos += 1;
        Some(Sample::new(x, Some(label)))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rest = self.cfg.n_total - self.pos;
        (rest, Some(rest))
    }
}
