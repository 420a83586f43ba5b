//! Hoeffding-bound drift detector on a bounded error signal.
//!
//! The window holds the ensemble's 0/1 errors on labeled samples. The cut
//! point is the prefix whose mean plus its Hoeffding bound is smallest
//! (earliest on ties); the stream is then tested for a mean increase of the
//! whole window over that prefix at the warning and drift significance
//! levels. Both levels are divided by the window length because the cut is
//! chosen from every prefix of the window.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftState {
    #[default]
    Stable,
    Warning,
    Drift,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftDetector {
    window: VecDeque<f64>,
    max_window: usize,
    /// Range of the monitored statistic.
    pub lo: f64,
    pub hi: f64,
    pub alpha_warn: f64,
    pub alpha_drift: f64,
    pub state: DriftState,
    pub cut: Option<usize>,
}

/// Single-group Hoeffding bound `(b − a) √(ln(1/α) / 2n)`.
pub fn hoeffding_bound(range: f64, n: usize, alpha: f64) -> f64 {
    range * ((1.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

/// Bound on the difference between the full-window mean and the mean of
/// its first `cut` entries, with `m = n − cut` trailing entries.
pub fn cut_bound(range: f64, cut: usize, m: usize, alpha: f64) -> f64 {
    let (c, m) = (cut as f64, m as f64);
    range * (m / (2.0 * c * (m + c)) * (1.0 / alpha).ln()).sqrt()
}

impl DriftDetector {
    pub fn new(alpha_warn: f64, alpha_drift: f64, max_window: usize) -> Self {
        DriftDetector {
            window: VecDeque::new(),
            max_window: max_window.max(2),
            lo: 0.0,
            hi: 1.0,
            alpha_warn,
            alpha_drift,
            state: DriftState::Stable,
            cut: None,
        }
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    pub fn reset(&mut self) {
        self.window.clear();
        self.cut = None;
        self.state = DriftState::Stable;
    }

    pub fn step(&mut self, value: f64) -> DriftState {
        let value = value.clamp(self.lo, self.hi);
        self.window.push_back(value);
        if self.window.len() > self.max_window {
            self.window.pop_front();
        }
        let range = self.hi - self.lo;
        let n = self.window.len();
        let total: f64 = self.window.iter().sum();

        let mut prefix = 0.0;
        let mut best = (0usize, f64::INFINITY, 0.0);
        for (k, &x) in self.window.iter().enumerate() {
            prefix += x;
            let cut = k + 1;
            let mean = prefix / cut as f64;
            let score = mean + hoeffding_bound(range, cut, self.alpha_drift);
            if score < best.1 {
                best = (cut, score, mean);
            }
        }
        let (cut, _, cut_mean) = best;
        self.cut = Some(cut);
        if cut >= n {
            self.state = DriftState::Stable;
            return self.state;
        }
        let increase = total / n as f64 - cut_mean;
        let m = n - cut;
        let tests = n as f64;
        self.state = if increase >= cut_bound(range, cut, m, self.alpha_drift / tests) {
            DriftState::Drift
        } else if increase >= cut_bound(range, cut, m, self.alpha_warn / tests) {
            DriftState::Warning
        } else {
            DriftState::Stable
        };
        if self.state == DriftState::Drift {
            self.window.clear();
            self.cut = None;
        }
        self.state
    }
}
