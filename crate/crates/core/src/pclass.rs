//! Evolving first-order fuzzy base classifier.
//!
//! Each rule is a Gaussian region (center plus inverse dispersion matrix)
//! with a linear multi-output consequent `y = x_e W` learned by fuzzily
//! weighted recursive least squares with quadratic weight decay. Rules are
//! added when a labeled sample is simultaneously badly predicted, outside
//! the winning rule's confidence ellipsoid and in a low-density region of
//! the stream. Rules are archived when their decayed firing becomes
//! insignificant (ERS) or when the stream density at their center collapses
//! relative to its peak (P+). Archived rules can be recalled when a sample
//! lands inside them again.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::stream::{argmax, one_hot, BaseKind};

/// Minimum eigenvalue kept when repairing a dispersion matrix.
pub const SPD_FLOOR: f64 = 1e-8;
/// Rules with a normalized firing at or below this skip consequent learning.
pub const MIN_FIRING: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowPruneParams {
    /// Prediction-error gate (`‖t − ŷ‖₂`) for rule growth.
    pub err_grow: f64,
    /// Chi-square quantile for the novelty gate.
    pub novelty_quantile: f64,
    /// Density gate: grow when density < mean − `density_sigmas`·std.
    pub density_sigmas: f64,
    /// Winner volume cap as a fraction of the (±3σ)ᵘ box.
    pub volume_cap: f64,
    /// ERS gate as a fraction of the mean rule activity.
    pub prune_frac: f64,
    /// Decay of the running activity.
    pub activity_decay: f64,
    /// P+ gate as a fraction of the rule's peak potential.
    pub potential_frac: f64,
    /// Minimum age (samples) before a rule may be pruned.
    pub age_min: u64,
    /// Quadratic weight-decay strength in the consequent update.
    pub weight_decay: f64,
    /// Spread of the very first rule.
    pub init_spread: f64,
    /// Floor on the spread of later rules.
    pub min_spread: f64,
    /// Initial RLS covariance scale.
    pub rls_init: f64,
}

impl GrowPruneParams {
    /// Defaults with `age_min` tied to the chunk size.
    pub fn for_chunk(chunk_size: usize) -> Self {
        GrowPruneParams {
            err_grow: 0.5,
            novelty_quantile: 0.95,
            density_sigmas: 2.0,
            volume_cap: 0.25,
            prune_frac: 0.1,
            activity_decay: 0.99,
            potential_frac: 0.2,
            age_min: 2 * chunk_size as u64,
            weight_decay: 1e-7,
            init_spread: 1.0,
            min_spread: 0.1,
            rls_init: 1e5,
        }
    }
}

impl Default for GrowPruneParams {
    fn default() -> Self {
        Self::for_chunk(250)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyRule {
    pub center: DVector<f64>,
    pub inv_cov: DMatrix<f64>,
    pub support: u64,
    pub class_support: Vec<u64>,
    /// Consequent, `(u+1) × O`, first row is the intercept.
    pub weights: DMatrix<f64>,
    pub rls_cov: DMatrix<f64>,
    pub activity: f64,
    pub peak_potential: f64,
    pub age: u64,
}

/// `[1, x ⊙ mask]`.
pub fn extended_input(x: &DVector<f64>, mask: &DVector<f64>) -> DVector<f64> {
    let mut xe = DVector::zeros(x.len() + 1);
    xe[0] = 1.0;
    for j in 0..x.len() {
        xe[j + 1] = x[j] * mask[j];
    }
    xe
}

impl FuzzyRule {
    pub fn new(
        center: DVector<f64>,
        spread: f64,
        label: usize,
        n_classes: usize,
        weights: DMatrix<f64>,
        rls_init: f64,
    ) -> Self {
        let u = center.len();
        let mut class_support = vec![0; n_classes];
        class_support[label - 1] = 1;
        FuzzyRule {
            center,
            inv_cov: DMatrix::identity(u, u) / (spread * spread),
            support: 1,
            class_support,
            weights,
            rls_cov: DMatrix::identity(u + 1, u + 1) * rls_init,
            activity: 1.0,
            peak_potential: 0.0,
            age: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_support.len()
    }

    /// `(x − C) Σ⁻¹ (x − C)ᵀ` over the active features.
    pub fn mahalanobis(&self, x: &DVector<f64>, mask: &DVector<f64>) -> f64 {
        let diff = (x - &self.center).component_mul(mask);
        (diff.transpose() * &self.inv_cov * &diff)[(0, 0)].max(0.0)
    }

    pub fn fire(&self, x: &DVector<f64>, mask: &DVector<f64>) -> f64 {
        (-self.mahalanobis(x, mask)).exp()
    }

    /// `det Σ = 1 / det Σ⁻¹`.
    pub fn volume(&self) -> Result<f64> {
        let det = self.inv_cov.determinant();
        if det > 0.0 && det.is_finite() {
            Ok(1.0 / det)
        } else {
            Err(Error::Invariant(format!("non-positive dispersion determinant {det}")))
        }
    }

    /// Gaussian likelihood normalized by the rule volume.
    pub fn likelihood(&self, x: &DVector<f64>, mask: &DVector<f64>) -> f64 {
        let v = self.volume().unwrap_or(f64::MIN_POSITIVE);
        self.fire(x, mask) / (2.0 * std::f64::consts::PI * v).sqrt()
    }

    pub fn consequent(&self, x_e: &DVector<f64>) -> DVector<f64> {
        self.weights.tr_mul(x_e)
    }

    /// One FWGRLS step with firing weight `lambda`.
    pub fn fwgrls_update(
        &mut self,
        lambda: f64,
        x_e: &DVector<f64>,
        target: &DVector<f64>,
        weight_decay: f64,
    ) -> Result<()> {
        let psi_x = &self.rls_cov * x_e;
        let denom = 1.0 / lambda + x_e.dot(&psi_x);
        if !(denom > 0.0) {
            return Err(Error::Invariant(format!("RLS gain denominator {denom}")));
        }
        let gain = &psi_x / denom;
        self.rls_cov -= &gain * psi_x.transpose();
        symmetrize(&mut self.rls_cov);
        let err = target - self.consequent(x_e);
        let decay = &self.rls_cov * &self.weights * (2.0 * weight_decay);
        self.weights += &gain * err.transpose();
        self.weights -= decay;
        Ok(())
    }

    /// Support-weighted premise update for a sample assigned to this rule.
    fn absorb(&mut self, x: &DVector<f64>, label: usize, kind: BaseKind) {
        self.support += 1;
        self.class_support[label - 1] += 1;
        let n = self.support as f64;
        let d = x - &self.center;
        self.center += &d / n;
        match kind {
            BaseKind::AxisParallel => {
                for j in 0..d.len() {
                    let var = 1.0 / self.inv_cov[(j, j)];
                    let var = (n - 1.0) / n * (var + d[j] * d[j] / n);
                    self.inv_cov[(j, j)] = 1.0 / var.max(SPD_FLOOR);
                }
            }
            BaseKind::Multivariate => {
                // Σ_new = (N−1)/N (Σ + v vᵀ), v = d/√N, inverted by Sherman–Morrison.
                let v = &d / n.sqrt();
                let sv = &self.inv_cov * &v;
                let k = 1.0 + v.dot(&sv);
                let mut inv = &self.inv_cov - (&sv * sv.transpose()) / k;
                inv *= n / (n - 1.0);
                symmetrize(&mut inv);
                self.inv_cov = inv;
                repair_spd(&mut self.inv_cov);
            }
        }
    }

    fn is_spd(m: &DMatrix<f64>) -> bool {
        m.clone().cholesky().is_some()
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

/// Floors the eigenvalues of a symmetric matrix at `SPD_FLOOR` if it is not
/// positive definite.
fn repair_spd(m: &mut DMatrix<f64>) {
    if FuzzyRule::is_spd(m) && m.iter().all(|v| v.is_finite()) {
        return;
    }
    if m.iter().any(|v| !v.is_finite()) {
        *m = DMatrix::identity(m.nrows(), m.ncols());
        return;
    }
    let eig = m.clone().symmetric_eigen();
    let vals = eig.eigenvalues.map(|l| l.max(SPD_FLOOR));
    *m = &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose();
    symmetrize(m);
}

/// Recursive density estimate: running mean and mean squared norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdeState {
    pub count: u64,
    pub mean: DVector<f64>,
    pub mean_sq_norm: f64,
}

impl RdeState {
    pub fn new(dim: usize) -> Self {
        RdeState {
            count: 0,
            mean: DVector::zeros(dim),
            mean_sq_norm: 0.0,
        }
    }

    pub fn update(&mut self, x: &DVector<f64>) {
        self.count += 1;
        let n = self.count as f64;
        self.mean += (x - &self.mean) / n;
        self.mean_sq_norm += (x.norm_squared() - self.mean_sq_norm) / n;
    }

    /// Inverse-multiquadratic density `1 / (1 + ‖x − μ‖² + s − ‖μ‖²)`.
    pub fn density(&self, x: &DVector<f64>) -> f64 {
        let spread = (self.mean_sq_norm - self.mean.norm_squared()).max(0.0);
        1.0 / (1.0 + (x - &self.mean).norm_squared() + spread)
    }
}

/// Running mean and variance of a scalar.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ScalarStats {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl ScalarStats {
    pub fn push(&mut self, v: f64) {
        self.count += 1;
        let delta = v - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (v - self.mean);
    }

    pub fn std(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowDecision {
    Grow,
    UpdateWinner(usize),
    /// Growth forced because the winner is over the volume cap.
    GrowForcedByVolume,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PruneReason {
    Ers,
    PotentialPlus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    pub scores: DVector<f64>,
    /// 1-based predicted class.
    pub class: usize,
    /// Normalized firing strengths, one per rule.
    pub firing: Vec<f64>,
}

/// What happened to the rule base during one `train_sample` call.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainOutcome {
    pub grown: bool,
    pub recalled: bool,
    pub pruned: Vec<PruneReason>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PClassModel {
    pub rules: Vec<FuzzyRule>,
    pub archive: Vec<FuzzyRule>,
    pub hyper: GrowPruneParams,
    pub kind: BaseKind,
    dim: usize,
    n_classes: usize,
    rde: RdeState,
    density_stats: ScalarStats,
    /// Chi-square novelty cutoffs indexed by degrees of freedom − 1.
    novelty_cutoffs: Vec<f64>,
}

impl PClassModel {
    pub fn new(dim: usize, n_classes: usize, kind: BaseKind, hyper: GrowPruneParams) -> Self {
        let novelty_cutoffs = (1..=dim)
            .map(|dof| {
                ChiSquared::new(dof as f64)
                    .map(|c| c.inverse_cdf(hyper.novelty_quantile))
                    .unwrap_or(f64::INFINITY)
            })
            .collect();
        PClassModel {
            rules: Vec::new(),
            archive: Vec::new(),
            hyper,
            kind,
            dim,
            n_classes,
            rde: RdeState::new(dim),
            density_stats: ScalarStats::default(),
            novelty_cutoffs,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_rules(&self) -> usize {
        self.rules.len()
    }

    pub fn rde(&self) -> &RdeState {
        &self.rde
    }

    /// Normalized firing strengths (softmax of the negative distances, so
    /// they stay well defined far from every rule).
    pub fn normalized_firing(&self, x: &DVector<f64>, mask: &DVector<f64>) -> Vec<f64> {
        normalized_firing(self.rules.iter(), x, mask)
    }

    pub fn infer(&self, x: &DVector<f64>, mask: &DVector<f64>) -> Result<Inference> {
        if self.rules.is_empty() {
            return Err(Error::EmptyModel);
        }
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let firing = self.normalized_firing(x, mask);
        let x_e = extended_input(x, mask);
        let mut scores = DVector::zeros(self.n_classes);
        for (rule, &l) in self.rules.iter().zip(&firing) {
            scores.axpy(l, &rule.consequent(&x_e), 1.0);
        }
        let class = argmax(&scores) + 1;
        Ok(Inference { scores, class, firing })
    }

    /// Rule maximizing `log fire + log P(R) + log P(label | R)`.
    pub fn winner(&self, x: &DVector<f64>, mask: &DVector<f64>, label: usize) -> Option<usize> {
        let total: u64 = self.rules.iter().map(|r| r.support).sum();
        let o = self.n_classes as f64;
        let mut best: Option<(usize, f64)> = None;
        for (i, r) in self.rules.iter().enumerate() {
            let prior = (r.support as f64 / total as f64).ln();
            let purity = ((r.class_support[label - 1] + 1) as f64 / (r.support as f64 + o)).ln();
            let score = -r.mahalanobis(x, mask) + prior + purity;
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((i, score));
            }
        }
        best.map(|(i, _)| i)
    }

    fn active_dims(mask: &DVector<f64>) -> usize {
        (mask.iter().filter(|&&m| m != 0.0).count()).max(1)
    }

    /// Space volume proxy: the ±3σ box in standardized coordinates.
    fn space_volume(&self) -> f64 {
        6f64.powi(self.dim as i32)
    }

    /// Largest spread whose rule volume is half the volume cap, so a new
    /// rule never triggers the volume override by itself.
    fn max_spread(&self) -> f64 {
        (0.5 * self.hyper.volume_cap * self.space_volume()).powf(0.5 / self.dim as f64)
    }

    /// Decides between growing a rule and adapting the winner. `density` is
    /// the RDE density of `x`, computed after folding `x` into the RDE.
    pub fn grow_check(
        &self,
        x: &DVector<f64>,
        mask: &DVector<f64>,
        label: usize,
        density: f64,
    ) -> Result<GrowDecision> {
        if self.rules.is_empty() {
            return Ok(GrowDecision::Grow);
        }
        let t = one_hot(label, self.n_classes);
        let pred = self.infer(x, mask)?;
        let winner = self.winner(x, mask, label).ok_or(Error::EmptyModel)?;

        let significant = (&t - &pred.scores).norm() > self.hyper.err_grow;
        let cutoff = self.novelty_cutoffs[Self::active_dims(mask) - 1];
        let novel = self.rules[winner].mahalanobis(x, mask) > cutoff;
        let ds = &self.density_stats;
        let sparse = ds.count > 0 && density < ds.mean - self.hyper.density_sigmas * ds.std();

        if significant && novel && sparse {
            return Ok(GrowDecision::Grow);
        }
        if self.rules[winner].volume()? > self.hyper.volume_cap * self.space_volume() {
            return Ok(GrowDecision::GrowForcedByVolume);
        }
        Ok(GrowDecision::UpdateWinner(winner))
    }

    /// Creates a rule at `x`, inheriting the consequent of `winner`.
    pub fn add_rule(&mut self, x: &DVector<f64>, label: usize, winner: Option<usize>) -> usize {
        let spread = if self.rules.is_empty() {
            self.hyper.init_spread
        } else {
            let nearest = self
                .rules
                .iter()
                .map(|r| (x - &r.center).norm())
                .fold(f64::INFINITY, f64::min);
            (0.5 * nearest).clamp(self.hyper.min_spread, self.max_spread())
        };
        let weights = match winner {
            Some(w) => self.rules[w].weights.clone(),
            None => DMatrix::zeros(self.dim + 1, self.n_classes),
        };
        let mut rule = FuzzyRule::new(x.clone(), spread, label, self.n_classes, weights, self.hyper.rls_init);
        rule.activity = 1.0 / (self.rules.len() + 1) as f64;
        self.rules.push(rule);
        self.rules.len() - 1
    }

    /// Firing threshold an archived rule must beat to be recalled.
    pub fn recall_handicap(&self) -> f64 {
        (-self.hyper.novelty_quantile * self.dim as f64 / 2.0).exp()
    }

    /// Archived rule that fires on `x` more strongly than a handicapped fresh
    /// rule would.
    pub fn recall_check(&self, x: &DVector<f64>, mask: &DVector<f64>) -> Option<usize> {
        let h = self.recall_handicap();
        let mut best: Option<(usize, f64)> = None;
        for (i, r) in self.archive.iter().enumerate() {
            let f = r.fire(x, mask);
            if f > h && best.is_none_or(|(_, b)| f > b) {
                best = Some((i, f));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Moves archived rule `idx` back into the active rule base.
    pub fn reactivate(&mut self, idx: usize) -> usize {
        let mut rule = self.archive.remove(idx);
        rule.activity = 1.0 / (self.rules.len() + 1) as f64;
        rule.age = 0;
        rule.peak_potential = 0.0;
        self.rules.push(rule);
        self.rules.len() - 1
    }

    pub fn update_winner(&mut self, winner: usize, x: &DVector<f64>, label: usize) {
        let kind = self.kind;
        self.rules[winner].absorb(x, label, kind);
    }

    /// Updates activities and potentials, then returns the indices (ascending)
    /// of rules flagged for pruning. Never flags every rule.
    pub fn prune_check(&mut self, firing: &[f64]) -> Vec<(usize, PruneReason)> {
        let gamma = self.hyper.activity_decay;
        let warm = self.rde.count >= self.hyper.age_min;
        let mut potentials = Vec::with_capacity(self.rules.len());
        for (rule, &l) in self.rules.iter_mut().zip(firing) {
            rule.activity = gamma * rule.activity + (1.0 - gamma) * l;
            let p = self.rde.density(&rule.center);
            if warm {
                rule.peak_potential = rule.peak_potential.max(p);
            }
            potentials.push(p);
        }
        if self.rules.len() < 2 {
            return Vec::new();
        }
        let mean_activity = self.rules.iter().map(|r| r.activity).sum::<f64>() / self.rules.len() as f64;
        let mut flagged = Vec::new();
        for (i, rule) in self.rules.iter().enumerate() {
            if rule.age < self.hyper.age_min {
                continue;
            }
            if rule.activity < self.hyper.prune_frac * mean_activity {
                flagged.push((i, PruneReason::Ers));
            } else if rule.peak_potential > 0.0 && potentials[i] < self.hyper.potential_frac * rule.peak_potential {
                flagged.push((i, PruneReason::PotentialPlus));
            }
        }
        if flagged.len() == self.rules.len() {
            let keep = (0..self.rules.len()).fold(0, |b, i| {
                if self.rules[i].activity > self.rules[b].activity {
                    i
                } else {
                    b
                }
            });
            flagged.retain(|&(i, _)| i != keep);
        }
        flagged
    }

    fn archive_rules(&mut self, flagged: &[(usize, PruneReason)]) {
        for &(i, _) in flagged.iter().rev() {
            let rule = self.rules.remove(i);
            self.archive.push(rule);
        }
    }

    /// One supervised step: structure learning, consequent learning, pruning.
    pub fn train_sample(&mut self, x: &DVector<f64>, mask: &DVector<f64>, label: usize) -> Result<TrainOutcome> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if label == 0 || label > self.n_classes {
            return Err(Error::InsufficientData(format!("label {label} out of range")));
        }
        let mut outcome = TrainOutcome::default();
        self.rde.update(x);
        let density = self.rde.density(x);
        let decision = self.grow_check(x, mask, label, density)?;
        self.density_stats.push(density);

        match decision {
            GrowDecision::Grow | GrowDecision::GrowForcedByVolume => {
                if let Some(idx) = self.recall_check(x, mask) {
                    self.reactivate(idx);
                    outcome.recalled = true;
                } else {
                    let winner = self.winner(x, mask, label);
                    self.add_rule(x, label, winner);
                    outcome.grown = true;
                }
            }
            GrowDecision::UpdateWinner(w) => self.update_winner(w, x, label),
        }

        let firing = self.normalized_firing(x, mask);
        let x_e = extended_input(x, mask);
        let t = one_hot(label, self.n_classes);
        for (rule, &l) in self.rules.iter_mut().zip(&firing) {
            if l > MIN_FIRING {
                rule.fwgrls_update(l, &x_e, &t, self.hyper.weight_decay)?;
            }
        }

        for rule in &mut self.rules {
            rule.age += 1;
        }
        let flagged = self.prune_check(&firing);
        outcome.pruned = flagged.iter().map(|&(_, r)| r).collect();
        self.archive_rules(&flagged);
        Ok(outcome)
    }

    /// Checks the structural invariants of every active and archived rule.
    pub fn check_invariants(&self) -> Result<()> {
        for r in self.rules.iter().chain(&self.archive) {
            if r.class_support.iter().sum::<u64>() != r.support {
                return Err(Error::Invariant("class supports do not sum to support".into()));
            }
            if !FuzzyRule::is_spd(&r.inv_cov) {
                return Err(Error::Invariant("inverse covariance not SPD".into()));
            }
            if !FuzzyRule::is_spd(&r.rls_cov) {
                return Err(Error::Invariant("RLS covariance not SPD".into()));
            }
            if !(0.0..=1.0).contains(&r.activity) {
                return Err(Error::Invariant("activity out of [0, 1]".into()));
            }
            if self.kind == BaseKind::AxisParallel {
                let u = r.dim();
                for i in 0..u {
                    for j in 0..u {
                        if i != j && r.inv_cov[(i, j)] != 0.0 {
                            return Err(Error::Invariant("off-diagonal dispersion".into()));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Stored parameters: centers, dispersions and consequents.
    pub fn parameter_count(&self) -> usize {
        let u = self.dim;
        let dispersion = match self.kind {
            BaseKind::AxisParallel => u,
            BaseKind::Multivariate => u * (u + 1) / 2,
        };
        self.rules.len() * (u + dispersion + (u + 1) * self.n_classes)
    }
}

/// Softmax of negative Mahalanobis distances over any rule collection.
pub fn normalized_firing<'a, I>(rules: I, x: &DVector<f64>, mask: &DVector<f64>) -> Vec<f64>
where
    I: IntoIterator<Item = &'a FuzzyRule>,
{
    let d: Vec<f64> = rules.into_iter().map(|r| r.mahalanobis(x, mask)).collect();
    let dmin = d.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = d.iter().map(|di| (dmin - di).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|wi| wi / total).collect()
}
