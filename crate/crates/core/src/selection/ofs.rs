//! Online feature selection over the pooled rule base of every member.
//!
//! All rules are viewed as one virtual classifier. On misclassified samples
//! its consequents take an L2-regularized SGD step followed by a projection
//! onto the `1/√χ` ball; feature relevance is the normalized absolute
//! consequent mass per input row, and the top-B features stay active.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::pclass::{extended_input, normalized_firing, FuzzyRule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfsParams {
    pub learning_rate: f64,
    pub regularizer: f64,
}

impl Default for OfsParams {
    fn default() -> Self {
        OfsParams {
            learning_rate: 0.05,
            regularizer: 0.01,
        }
    }
}

impl OfsParams {
    pub fn radius(&self) -> f64 {
        1.0 / self.regularizer.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMask {
    pub active: DVector<f64>,
    pub scores: DVector<f64>,
    pub target: usize,
}

impl FeatureMask {
    pub fn all(dim: usize) -> Self {
        FeatureMask {
            active: DVector::from_element(dim, 1.0),
            scores: DVector::from_element(dim, 1.0 / dim as f64),
            target: dim,
        }
    }

    pub fn active_indices(&self) -> Vec<usize> {
        (0..self.active.len()).filter(|&j| self.active[j] != 0.0).collect()
    }

    /// `x ⊙ mask`.
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        x.component_mul(&self.active)
    }
}

/// Pooled virtual prediction `Σ λ_i x_e W_i` and the firings used.
pub fn virtual_predict(rules: &[&FuzzyRule], x: &DVector<f64>, mask: &DVector<f64>) -> (DVector<f64>, Vec<f64>) {
    let firing = normalized_firing(rules.iter().copied(), x, mask);
    let x_e = extended_input(x, mask);
    let o = rules.first().map_or(0, |r| r.n_classes());
    let mut y = DVector::zeros(o);
    for (r, &l) in rules.iter().zip(&firing) {
        y.axpy(l, &r.consequent(&x_e), 1.0);
    }
    (y, firing)
}

/// `∂E/∂W_i = λ_i x_eᵀ (ŷ − t)` for `E = ½‖ŷ − t‖²`.
pub fn gradient(lambda: f64, x_e: &DVector<f64>, residual: &DVector<f64>) -> DMatrix<f64> {
    x_e * residual.transpose() * lambda
}

/// One SGD + projection step on the pooled rule base; updates write through.
pub fn ofs_step(
    rules: &mut [&mut FuzzyRule],
    x: &DVector<f64>,
    mask: &DVector<f64>,
    target: &DVector<f64>,
    params: &OfsParams,
) {
    if rules.is_empty() {
        return;
    }
    let (y, firing) = {
        let view: Vec<&FuzzyRule> = rules.iter().map(|r| &**r).collect();
        virtual_predict(&view, x, mask)
    };
    let residual = y - target;
    let x_e = extended_input(x, mask);
    let shrink = 1.0 - params.learning_rate * params.regularizer;
    let radius = params.radius();
    for (rule, &l) in rules.iter_mut().zip(&firing) {
        let grad = gradient(l, &x_e, &residual);
        rule.weights *= shrink;
        rule.weights -= grad * params.learning_rate;
        let norm = rule.weights.norm();
        if norm > radius {
            rule.weights *= radius / norm;
        }
    }
}

/// Normalized absolute consequent mass per input feature (intercept excluded).
pub fn feature_scores<'a, I>(rules: I, dim: usize) -> DVector<f64>
where
    I: IntoIterator<Item = &'a FuzzyRule>,
{
    let mut mass: DVector<f64> = DVector::zeros(dim);
    for r in rules {
        for j in 0..dim {
            mass[j] += r.weights.row(j + 1).iter().map(|w| w.abs()).sum::<f64>();
        }
    }
    let total = mass.sum();
    if total > 0.0 && total.is_finite() {
        mass / total
    } else {
        DVector::from_element(dim, 1.0 / dim as f64)
    }
}

/// Keeps the `b` highest-scoring features (lowest index on ties).
pub fn apply_mask(scores: &DVector<f64>, b: usize) -> FeatureMask {
    let dim = scores.len();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]).then(i.cmp(&j)));
    let mut active = DVector::zeros(dim);
    for &j in order.iter().take(b.min(dim)) {
        active[j] = 1.0;
    }
    FeatureMask {
        active,
        scores: scores.clone(),
        target: b,
    }
}
