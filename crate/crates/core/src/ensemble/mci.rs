//! Maximal compression index between two members' outputs.

use std::collections::BTreeMap;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Running first and second moments of a pair of scalar series. The
/// co-moment update is symmetric in its arguments so swapping the series
/// gives bit-identical statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PairStats {
    pub count: u64,
    pub mean1: f64,
    pub mean2: f64,
    pub m2_1: f64,
    pub m2_2: f64,
    pub co_moment: f64,
}

impl PairStats {
    pub fn push(&mut self, y1: f64, y2: f64) {
        self.count += 1;
        let n = self.count as f64;
        let d1 = y1 - self.mean1;
        let d2 = y2 - self.mean2;
        let w = (n - 1.0) / n;
        self.m2_1 += w * (d1 * d1);
        self.m2_2 += w * (d2 * d2);
        self.co_moment += w * (d1 * d2);
        self.mean1 += d1 / n;
        self.mean2 += d2 / n;
    }

    pub fn from_series(y1: &[f64], y2: &[f64]) -> Self {
        let mut s = PairStats::default();
        for (&a, &b) in y1.iter().zip(y2) {
            s.push(a, b);
        }
        s
    }

    pub fn swapped(&self) -> Self {
        PairStats {
            count: self.count,
            mean1: self.mean2,
            mean2: self.mean1,
            m2_1: self.m2_2,
            m2_2: self.m2_1,
            co_moment: self.co_moment,
        }
    }

    fn denom(&self) -> f64 {
        (self.count - 1) as f64
    }

    pub fn var1(&self) -> f64 {
        (self.m2_1 / self.denom()).max(0.0)
    }

    pub fn var2(&self) -> f64 {
        (self.m2_2 / self.denom()).max(0.0)
    }

    pub fn cov(&self) -> f64 {
        self.co_moment / self.denom()
    }

    pub fn mci(&self) -> Result<f64> {
        if self.count < 2 {
            return Err(Error::InsufficientData(format!(
                "MCI needs at least 2 paired outputs, got {}",
                self.count
            )));
        }
        Ok(mci(self.var1(), self.var2(), self.cov()))
    }
}

/// `ξ = ½[(v1 + v2) − √((v1 + v2)² − 4 v1 v2 (1 − ρ²))]`, zero when either
/// series is constant.
///
/// ξ is the smaller eigenvalue of the pair's covariance matrix, so it is
/// evaluated as `det / λ_max` to avoid cancellation when ρ² is near 0 or 1.
pub fn mci(v1: f64, v2: f64, cov: f64) -> f64 {
    let prod = v1 * v2;
    if !(prod > 0.0) {
        return 0.0;
    }
    let sum = v1 + v2;
    let cov2 = (cov * cov).min(prod);
    let det = prod - cov2;
    let spread = ((v1 - v2) * (v1 - v2) + 4.0 * cov2).sqrt();
    let lambda_max = 0.5 * (sum + spread);
    (det / lambda_max).clamp(0.0, 0.5 * sum)
}

/// Per-pair, per-class output statistics for the current chunk, keyed by
/// member ids (smaller id first).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MciState {
    pairs: BTreeMap<(u64, u64), Vec<PairStats>>,
}

/// Summary of one member pair over the chunk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSummary {
    pub ids: (u64, u64),
    pub count: u64,
    /// Mean MCI over class dimensions.
    pub xi: f64,
    /// Mean output variance of each member over class dimensions.
    pub var1: f64,
    pub var2: f64,
}

impl MciState {
    pub fn reset(&mut self) {
        self.pairs.clear();
    }

    /// Records the outputs of every pair of voting members for one sample.
    pub fn observe(&mut self, outputs: &[(u64, &DVector<f64>)]) {
        for (a, &(id_a, ya)) in outputs.iter().enumerate() {
            for &(id_b, yb) in &outputs[a + 1..] {
                let (key, first, second) = if id_a < id_b {
                    ((id_a, id_b), ya, yb)
                } else {
                    ((id_b, id_a), yb, ya)
                };
                let stats = self
                    .pairs
                    .entry(key)
                    .or_insert_with(|| vec![PairStats::default(); first.len()]);
                for (s, (&p, &q)) in stats.iter_mut().zip(first.iter().zip(second.iter())) {
                    s.push(p, q);
                }
            }
        }
    }

    pub fn forget_member(&mut self, id: u64) {
        self.pairs.retain(|&(a, b), _| a != id && b != id);
    }

    pub fn summaries(&self) -> Vec<PairSummary> {
        self.pairs
            .iter()
            .filter(|(_, s)| s.first().is_some_and(|p| p.count >= 2))
            .map(|(&ids, stats)| {
                let o = stats.len() as f64;
                let xi = stats.iter().map(|s| s.mci().unwrap_or(0.0)).sum::<f64>() / o;
                PairSummary {
                    ids,
                    count: stats[0].count,
                    xi,
                    var1: stats.iter().map(|s| s.var1()).sum::<f64>() / o,
                    var2: stats.iter().map(|s| s.var2()).sum::<f64>() / o,
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_series_have_zero_index() {
        let y = [0.3, -1.2, 2.5, 0.7, 0.1];
        assert_eq!(PairStats::from_series(&y, &y).mci().unwrap(), 0.0);
        let shifted: Vec<f64> = y.iter().map(|v| v + 4.0).collect();
        assert!(PairStats::from_series(&y, &shifted).mci().unwrap().abs() < 1e-12);
    }

    #[test]
    fn orthogonal_series_saturate_the_bound() {
        let s = PairStats::from_series(&[1.0, -1.0, 1.0, -1.0], &[1.0, 1.0, -1.0, -1.0]);
        // sample variances 4/3 with the unbiased estimator; the bound is ½(v1 + v2)
        let bound = 0.5 * (s.var1() + s.var2());
        assert!(s.cov().abs() < 1e-15);
        assert!((s.mci().unwrap() - bound).abs() < 1e-12);
        // population form from the worked example: v1 = v2 = 1, ρ = 0 → ξ = 1
        assert_eq!(mci(1.0, 1.0, 0.0), 1.0);
    }

    #[test]
    fn anti_correlated_series_are_redundant() {
        let y = [0.3, -1.2, 2.5, 0.7];
        let neg: Vec<f64> = y.iter().map(|v| -2.0 * v).collect();
        assert!(PairStats::from_series(&y, &neg).mci().unwrap() < 1e-12);
    }

    #[test]
    fn constant_output_is_fully_compressible() {
        assert_eq!(
            PairStats::from_series(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0])
                .mci()
                .unwrap(),
            0.0
        );
    }

    #[test]
    fn too_few_samples_error() {
        assert!(PairStats::from_series(&[1.0], &[2.0]).mci().is_err());
    }

    #[test]
    fn state_keys_pairs_by_sorted_ids() {
        let mut st = MciState::default();
        let a = DVector::from_row_slice(&[1.0, 0.0]);
        let b = DVector::from_row_slice(&[0.0, 1.0]);
        st.observe(&[(7, &a), (3, &b)]);
        st.observe(&[(7, &b), (3, &a)]);
        let s = st.summaries();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].ids, (3, 7));
        st.forget_member(3);
        assert!(st.summaries().is_empty());
    }

    proptest! {
        #[test]
        fn mci_properties(
            pairs in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..50),
            c in -100.0f64..100.0,
        ) {
            let y1: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let y2: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let s = PairStats::from_series(&y1, &y2);
            let xi = s.mci().unwrap();
            prop_assert!(xi >= 0.0 && xi <= 0.5 * (s.var1() + s.var2()));
            prop_assert_eq!(xi, PairStats::from_series(&y2, &y1).mci().unwrap());
            let shifted: Vec<f64> = y1.iter().map(|v| v + c).collect();
            let xs = PairStats::from_series(&shifted, &y2).mci().unwrap();
            prop_assert!((xs - xi).abs() <= 1e-9 * (1.0 + xi));
        }
    }
}
