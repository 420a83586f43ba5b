//! Rotating hyperplane with a gradual switch between two concepts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::Sample;

/// Seed of the default concept weights, independent of the stream seed.
const CONCEPT_SEED: u64 = 0x5eed_c0de;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperplaneConfig {
    pub n_total: usize,
    pub d: usize,
    pub drift_start: usize,
    /// Length of the mixing ramp as a fraction of the stream.
    pub ramp_frac: f64,
    pub w_before: Option<Vec<f64>>,
    pub w_after: Option<Vec<f64>>,
    pub w0_before: Option<f64>,
    pub w0_after: Option<f64>,
    pub noise_frac: f64,
    pub seed: u64,
}

impl Default for HyperplaneConfig {
    fn default() -> Self {
        HyperplaneConfig {
            n_total: 120_000,
            d: 4,
            drift_start: 40_000,
            ramp_frac: 0.2,
            w_before: None,
            w_after: None,
            w0_before: None,
            w0_after: None,
            noise_frac: 0.0,
            seed: 0,
        }
    }
}

/// A concept `Σ w_i x_i > w0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub w: Vec<f64>,
    pub w0: f64,
}

impl Hyperplane {
    /// Class 1 strictly above the plane, class 2 on or below it.
    pub fn label(&self, x: &[f64]) -> usize {
        let s: f64 = self.w.iter().zip(x).map(|(w, x)| w * x).sum();
        if s > self.w0 {
            1
        } else {
            2
        }
    }

    /// Offset that splits the unit cube evenly.
    fn balanced(w: Vec<f64>, w0: Option<f64>) -> Self {
        let w0 = w0.unwrap_or_else(|| 0.5 * w.iter().sum::<f64>());
        Hyperplane { w, w0 }
    }
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

impl HyperplaneConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::Config("hyperplane needs d >= 2".into()));
        }
        if !(0 < self.drift_start && self.drift_start < self.n_total) {
            return Err(Error::Config("drift start must lie inside the stream".into()));
        }
        if !(self.ramp_frac >= 0.0 && self.ramp_frac <= 1.0) {
            return Err(Error::Config("ramp fraction must lie in [0, 1]".into()));
        }
        if !(0.0..1.0).contains(&self.noise_frac) {
            return Err(Error::Config("noise fraction must lie in [0, 1)".into()));
        }
        for w in [&self.w_before, &self.w_after].into_iter().flatten() {
            if w.len() != self.d {
                return Err(Error::Config(format!(
                    "weight vector length {} != d = {}",
                    w.len(),
                    self.d
                )));
            }
        }
        Ok(())
    }

    /// The two concepts, falling back to fixed seeded unit vectors.
    pub fn concepts(&self) -> (Hyperplane, Hyperplane) {
        let mut rng = ChaCha8Rng::seed_from_u64(CONCEPT_SEED ^ self.d as u64);
        let before = random_unit(&mut rng, self.d);
        let after = random_unit(&mut rng, self.d);
        (
            Hyperplane::balanced(self.w_before.clone().unwrap_or(before), self.w0_before),
            Hyperplane::balanced(self.w_after.clone().unwrap_or(after), self.w0_after),
        )
    }

    pub fn ramp_len(&self) -> usize {
        (self.ramp_frac * self.n_total as f64).round() as usize
    }

    /// Probability of drawing the label from the new concept at position `i`.
    pub fn mixing(&self, i: usize) -> f64 {
        if i < self.drift_start {
            return 0.0;
        }
        let ramp = self.ramp_len();
        if ramp == 0 {
            return 1.0;
        }
        ((i - self.drift_start) as f64 / ramp as f64).min(1.0)
    }
}

pub struct HyperplaneStream {
    cfg: HyperplaneConfig,
    before: Hyperplane,
    after: Hyperplane,
    rng: ChaCha8Rng,
    pos: usize,
}

pub fn gen_hyperplane(cfg: &HyperplaneConfig) -> Result<HyperplaneStream> {
    cfg.validate()?;
    let (before, after) = cfg.concepts();
    Ok(HyperplaneStream {
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        cfg: cfg.clone(),
        before,
        after,
        pos: 0,
    })
}

impl Iterator for HyperplaneStream {
    type Item = Sample;

    fn next(&mut self) -> Option<Sample> {
        if self.pos >= self.cfg.n_total {
            return None;
        }
        let x: Vec<f64> = (0..self.cfg.d).map(|_| self.rng.random_range(0.0..1.0)).collect();
        let mix = self.cfg.mixing(self.pos);
        let concept = if mix > 0.0 && self.rng.random_bool(mix) {
            &self.after
        } else {
            &self.before
        };
        let mut label = concept.label(&x);
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_rule_and_boundary() {
        let h = Hyperplane {
            w: vec![1.0, 1.0, 0.0, 0.0],
            w0: 1.0,
        };
        assert_eq!(h.label(&[0.9, 0.9, 0.3, 0.3]), 1);
        assert_eq!(h.label(&[0.5, 0.5, 0.3, 0.3]), 2);
    }

    #[test]
    fn default_concepts_are_balanced_and_distinct() {
        let cfg = HyperplaneConfig::default();
        let (a, b) = cfg.concepts();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 20_000;
        let (mut pos, mut disagree) = (0, 0);
        for _ in 0..n {
            let x: Vec<f64> = (0..cfg.d).map(|_| rng.random_range(0.0..1.0)).collect();
            pos += (a.label(&x) == 1) as usize;
            disagree += (a.label(&x) != b.label(&x)) as usize;
        }
        assert!((pos as f64 / n as f64 - 0.5).abs() < 0.03);
        assert!(disagree as f64 / n as f64 > 0.3, "{disagree}");
    }

    #[test]
    fn agreement_with_old_concept_decays_across_ramp() {
        let cfg = HyperplaneConfig {
            seed: 4,
            ..HyperplaneConfig::default()
        };
        let (before, _) = cfg.concepts();
        let window = 4_000;
        let rates: Vec<f64> = gen_hyperplane(&cfg)
            .unwrap()
            .collect::<Vec<_>>()
            .chunks(window)
            .map(|c| {
                c.iter()
                    .filter(|s| s.label == Some(before.label(s.x.as_slice())))
                    .count() as f64
                    / c.len() as f64
            })
            .collect();
        let start = cfg.drift_start / window;
        let end = (cfg.drift_start + cfg.ramp_len()) / window;
        assert!(rates[..start].iter().all(|&r| r == 1.0));
        for w in rates[start..end].windows(2) {
            assert!(w[1] <= w[0] + 0.02, "{rates:?}");
        }
        assert!(rates[end - 1] < rates[start] - 0.15);
    }

    #[test]
    fn seeded_streams_are_identical() {
        let cfg = HyperplaneConfig {
            n_total: 1000,
            drift_start: 400,
            seed: 2,
            ..HyperplaneConfig::default()
        };
        let a: Vec<Sample> = gen_hyperplane(&cfg).unwrap().collect();
        let b: Vec<Sample> = gen_hyperplane(&cfg).unwrap().collect();
        assert_eq!(a, b);
        assert_eq!(a.len(), 1000);
    }

    #[test]
    fn invalid_configs_error() {
        assert!(gen_hyperplane(&HyperplaneConfig {
            d: 1,
            ..Default::default()
        })
        .is_err());
        assert!(gen_hyperplane(&HyperplaneConfig {
            drift_start: 0,
            ..Default::default()
        })
        .is_err());
        assert!(gen_hyperplane(&HyperplaneConfig {
            w_before: Some(vec![1.0]),
            ..Default::default()
        })
        .is_err());
    }
}
