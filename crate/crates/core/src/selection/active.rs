//! Conflict-based online active learning.
//!
//! A sample is worth labeling when either the rule base is unsure which
//! class owns its region (input-space posterior) or the ensemble output sits
//! near the decision boundary of its two dominant classes (output-space
//! preference degree).

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pclass::FuzzyRule;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConflictScores {
    pub p_input: f64,
    pub p_output: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Accept,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveLearnParams {
    pub theta0: f64,
    /// Multiplicative shrink of the threshold after an accept.
    pub step_accept: f64,
    /// Multiplicative growth of the threshold after a reject.
    pub step_reject: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    /// Require both measures to be conflicting instead of either.
    pub conjunction: bool,
    /// Label-budget variant; not supported.
    pub budget: Option<f64>,
    /// Class-imbalance-aware variant; not supported.
    pub imbalance_aware: bool,
}

impl Default for ActiveLearnParams {
    fn default() -> Self {
        ActiveLearnParams {
            theta0: 0.7,
            step_accept: 0.01,
            step_reject: 0.005,
            theta_min: 0.5,
            theta_max: 0.95,
            conjunction: false,
            budget: None,
            imbalance_aware: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveLearnState {
    pub params: ActiveLearnParams,
    /// Threshold used for decisions, always within the configured bounds.
    pub theta: f64,
    /// Threshold before clamping to `theta_min`; it may sit one accept step
    /// below the bound so that accepts at the floor still cost a reject.
    pub latent: f64,
    pub accepted: u64,
    pub seen: u64,
}

impl ActiveLearnState {
    pub fn new(params: ActiveLearnParams) -> Result<Self> {
        if params.budget.is_some() {
            return Err(Error::Config("budget-capped active learning is not supported".into()));
        }
        if params.imbalance_aware {
            return Err(Error::Config(
                "class-imbalance-aware active learning is not supported".into(),
            ));
        }
        let p = &params;
        if !(0.0 < p.theta_min && p.theta_min <= p.theta0 && p.theta0 <= p.theta_max && p.theta_max <= 1.0) {
            return Err(Error::Config(
                "active learning thresholds must satisfy 0 < min <= theta <= max <= 1".into(),
            ));
        }
        if !(p.step_accept > 0.0 && p.step_accept < 1.0 && p.step_reject > 0.0) {
            return Err(Error::Config("active learning steps must be positive".into()));
        }
        Ok(ActiveLearnState {
            theta: params.theta0,
            latent: params.theta0,
            params,
            accepted: 0,
            seen: 0,
        })
    }

    /// Accept/reject decision followed by the threshold update.
    pub fn decide(&mut self, scores: ConflictScores) -> Decision {
        let in_conflict = scores.p_input <= self.theta;
        let out_conflict = scores.p_output <= self.theta;
        let accept = if self.params.conjunction {
            in_conflict && out_conflict
        } else {
            in_conflict || out_conflict
        };
        self.seen += 1;
        let p = self.params.clone();
        let decision = if accept {
            self.accepted += 1;
            let floor = p.theta_min * (1.0 - p.step_accept);
            self.latent = (self.latent * (1.0 - p.step_accept)).max(floor);
            Decision::Accept
        } else {
            self.latent = (self.latent * (1.0 + p.step_reject)).min(p.theta_max);
            Decision::Reject
        };
        self.theta = self.latent.max(p.theta_min);
        decision
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.seen == 0 {
            0.0
        } else {
            self.accepted as f64 / self.seen as f64
        }
    }
}

/// Winning-class Bayesian posterior over all rules of all members, with
/// Laplace-smoothed class likelihoods and support-proportional priors.
pub fn conflict_input<'a, I>(rules: I, x: &DVector<f64>, mask: &DVector<f64>, n_classes: usize) -> f64
where
    I: IntoIterator<Item = &'a FuzzyRule>,
{
    let rules: Vec<&FuzzyRule> = rules.into_iter().collect();
    let uninformative = 1.0 / n_classes as f64;
    if rules.is_empty() {
        return uninformative;
    }
    let total: f64 = rules.iter().map(|r| r.support as f64).sum();
    let o = n_classes as f64;
    let mut joint = vec![0.0; n_classes];
    let mut any = false;
    for r in &rules {
        let lik = r.likelihood(x, mask);
        if lik >= 1e-300 {
            any = true;
        }
        let prior = r.support as f64 / total;
        for (c, j) in joint.iter_mut().enumerate() {
            let cls = (r.class_support[c] + 1) as f64 / (r.support as f64 + o);
            *j += cls * lik * prior;
        }
    }
    let norm: f64 = joint.iter().sum();
    if !any || !(norm > 0.0) || !norm.is_finite() {
        return uninformative;
    }
    joint.iter().fold(0.0f64, |m, &j| m.max(j / norm))
}

/// Truncated preference degree of the two dominant global scores.
pub fn conflict_output(scores: &DVector<f64>) -> f64 {
    let (mut y1, mut y2) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &s in scores.iter() {
        if s > y1 {
            y2 = y1;
            y1 = s;
        } else if s > y2 {
            y2 = s;
        }
    }
    let sum = y1 + y2;
    if !sum.is_finite() || sum.abs() < 1e-12 {
        return 0.5;
    }
    (y1 / sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    fn pure_rule(c: &[f64], label: usize, support: u64) -> FuzzyRule {
        let mut r = FuzzyRule::new(v(c), 1.0, label, 2, DMatrix::zeros(c.len() + 1, 2), 1e5);
        r.support = support;
        r.class_support[label - 1] = support;
        r
    }

    #[test]
    fn single_pure_rule_gives_laplace_posterior() {
        let r = pure_rule(&[0.0, 0.0], 1, 1);
        let p = conflict_input([&r], &v(&[0.0, 0.0]), &v(&[1.0, 1.0]), 2);
        assert!((p - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_rules_are_maximally_conflicting() {
        let a = pure_rule(&[-1.0, 0.0], 1, 10);
        let b = pure_rule(&[1.0, 0.0], 2, 10);
        let p = conflict_input([&a, &b], &v(&[0.0, 0.0]), &v(&[1.0, 1.0]), 2);
        assert!((p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn heavy_rule_dominates_through_its_prior() {
        let a = pure_rule(&[-1.0, 0.0], 1, 100);
        let b = pure_rule(&[1.0, 0.0], 2, 1);
        let p = conflict_input([&a, &b], &v(&[0.0, 0.0]), &v(&[1.0, 1.0]), 2);
        // equal likelihoods, priors 100/101 and 1/101
        let j1 = (101.0 / 102.0) * 100.0 + (1.0 / 3.0) * 1.0;
        let j2 = (1.0 / 102.0) * 100.0 + (2.0 / 3.0) * 1.0;
        assert!(p > 0.5);
        assert!((p - j1 / (j1 + j2)).abs() < 1e-12);
    }

    #[test]
    fn vanishing_likelihood_is_uninformative() {
        let a = pure_rule(&[0.0, 0.0], 1, 5);
        let p = conflict_input([&a], &v(&[1e3, 1e3]), &v(&[1.0, 1.0]), 2);
        assert_eq!(p, 0.5);
    }

    #[test]
    fn conflict_output_examples() {
        assert_eq!(conflict_output(&v(&[0.8, 0.8])), 0.5);
        assert_eq!(conflict_output(&v(&[1.0, 0.0])), 1.0);
        assert_eq!(conflict_output(&v(&[1.5, -0.5])), 1.0);
        assert_eq!(conflict_output(&v(&[0.5, -0.5])), 0.5);
        assert!((conflict_output(&v(&[0.2, 0.7, 0.1])) - 0.7 / 0.9).abs() < 1e-15);
    }

    #[test]
    fn decide_examples() {
        let mut s = ActiveLearnState::new(ActiveLearnParams::default()).unwrap();
        let d = s.decide(ConflictScores {
            p_input: 0.9,
            p_output: 0.9,
        });
        assert_eq!(d, Decision::Reject);
        let mut s = ActiveLearnState::new(ActiveLearnParams::default()).unwrap();
        let d = s.decide(ConflictScores {
            p_input: 0.9,
            p_output: 0.5,
        });
        assert_eq!(d, Decision::Accept);

        let mut s = ActiveLearnState::new(ActiveLearnParams {
            conjunction: true,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(
            s.decide(ConflictScores {
                p_input: 0.9,
                p_output: 0.5
            }),
            Decision::Reject
        );
    }

    #[test]
    fn unsupported_variants_error() {
        assert!(ActiveLearnState::new(ActiveLearnParams {
            budget: Some(0.2),
            ..Default::default()
        })
        .is_err());
        assert!(ActiveLearnState::new(ActiveLearnParams {
            imbalance_aware: true,
            ..Default::default()
        })
        .is_err());
    }

    #[test]
    fn near_tie_stream_is_mostly_accepted() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut s = ActiveLearnState::new(ActiveLearnParams::default()).unwrap();
        let mut latent = s.theta;
        for _ in 0..2000 {
            let a = rng.random_range(0.0..1.0);
            let scores = v(&[a, a]);
            let p_in = rng.random_range(0.5..1.0);
            let d = s.decide(ConflictScores {
                p_input: p_in,
                p_output: conflict_output(&scores),
            });
            // threshold recurrence oracle
            latent = match d {
                Decision::Accept => (latent * 0.99).max(0.5 * 0.99),
                Decision::Reject => (latent * 1.005).min(0.95),
            };
            assert!((s.theta - latent.max(0.5)).abs() < 1e-15);
            assert!((0.5..=0.95).contains(&s.theta));
        }
        assert_eq!(s.theta, 0.5);
        assert!(s.acceptance_rate() >= 0.9);
    }

    proptest! {
        #[test]
        fn acceptance_is_monotone_in_theta(
            p_in in 0.0f64..1.0, p_out in 0.0f64..1.0,
            lo in 0.5f64..0.95, gap in 0.0f64..0.45, conj in any::<bool>()
        ) {
            let hi = (lo + gap).min(0.95);
            let params = ActiveLearnParams { conjunction: conj, ..Default::default() };
            let mut a = ActiveLearnState::new(params.clone()).unwrap();
            let mut b = ActiveLearnState::new(params).unwrap();
            a.theta = lo;
            b.theta = hi;
            let sc = ConflictScores { p_input: p_in, p_output: p_out };
            if a.decide(sc) == Decision::Accept {
                prop_assert_eq!(b.decide(sc), Decision::Accept);
            }
        }

        #[test]
        fn conflict_output_in_unit_interval(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0) {
            let p = conflict_output(&v(&[a, b, c]));
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }
}
