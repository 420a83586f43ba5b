#![allow(dead_code)]

use pensemble_core::Sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Tool-wear shaped stand-in: 157 samples, 12 features, four consecutive
/// tool lives in which the wear level rises from 1 to 5. A few features
/// track wear, the rest are noise.
pub fn wear_stand_in(seed: u64) -> Vec<Sample> {
    const N: usize = 157;
    const U: usize = 12;
    const LIVES: usize = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gains: Vec<f64> = (0..U).map(|j| if j < 5 { 1.0 + 0.3 * j as f64 } else { 0.0 }).collect();
    let life = N.div_ceil(LIVES);
    (0..N)
        .map(|i| {
            let level = 1 + 5 * (i % life) / life;
            let x = gains
                .iter()
                .map(|g| {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    g * level as f64 + 0.6 * e
                })
                .collect();
            Sample::new(x, Some(level))
        })
        .collect()
}

/// Wear levels grouped into fresh (1–2) and worn (3–5).
pub fn grouped(samples: &[Sample]) -> Vec<Sample> {
    samples
        .iter()
        .map(|s| {
            Sample::new(
                s.x.iter().copied().collect(),
                s.label.map(|l| if l <= 2 { 1 } else { 2 }),
            )
        })
        .collect()
}

/// Two well-separated Gaussian classes in two dimensions.
pub fn two_blobs(n: usize, seed: u64) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let label = if rng.random_bool(0.5) { 1 } else { 2 };
            let c = if label == 1 { -2.0 } else { 2.0 };
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            Sample::new(vec![c + 0.5 * a, c + 0.5 * b], Some(label))
        })
        .collect()
}
