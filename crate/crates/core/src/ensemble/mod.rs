//! Ensemble orchestration: weighted voting with penalty and reward,
//! drift-triggered member creation, MCI-based merging and winner training.

pub mod drift;
pub mod mci;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::pclass::{FuzzyRule, GrowPruneParams, PClassModel};
use crate::selection::{
    apply_mask, conflict_input, conflict_output, feature_scores, ofs_step, ActiveLearnParams, ActiveLearnState,
    ConflictScores, Decision, FeatureMask, OfsParams,
};
use crate::stream::{argmax, one_hot, DataChunk, RunningStandardizer, Sample, StreamConfig};

pub use drift::{DriftDetector, DriftState};
pub use mci::{mci, MciState, PairStats, PairSummary};

/// Tunables that are not part of [`StreamConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub grow: GrowPruneParams,
    pub active: ActiveLearnParams,
    pub ofs: OfsParams,
    /// Accepted samples a drift-created member needs before it votes.
    pub min_bootstrap: u64,
    /// Detector window length in chunks.
    pub detector_chunks: usize,
}

impl EnsembleParams {
    pub fn from_config(cfg: &StreamConfig) -> Self {
        EnsembleParams {
            grow: GrowPruneParams::for_chunk(cfg.chunk_size),
            active: ActiveLearnParams {
                theta0: cfg.theta,
                conjunction: cfg.al_conjunction,
                ..ActiveLearnParams::default()
            },
            ofs: OfsParams::default(),
            min_bootstrap: 5,
            detector_chunks: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMember {
    pub id: u64,
    pub model: PClassModel,
    pub beta: f64,
    pub chunk_sq_err: f64,
    pub chunk_correct: u64,
    pub chunk_seen: u64,
    /// Samples this member has been trained on.
    pub trained: u64,
    /// Whether the member takes part in voting.
    pub ready: bool,
}

impl EnsembleMember {
    pub fn new(id: u64, model: PClassModel) -> Self {
        EnsembleMember {
            id,
            model,
            beta: 1.0,
            chunk_sq_err: 0.0,
            chunk_correct: 0,
            chunk_seen: 0,
            trained: 0,
            ready: true,
        }
    }

    pub fn votes(&self) -> bool {
        self.ready && !self.model.rules.is_empty()
    }

    pub fn chunk_mse(&self) -> Option<f64> {
        (self.chunk_seen > 0).then(|| self.chunk_sq_err / self.chunk_seen as f64)
    }

    pub fn chunk_accuracy(&self) -> f64 {
        if self.chunk_seen == 0 {
            0.0
        } else {
            self.chunk_correct as f64 / self.chunk_seen as f64
        }
    }

    fn reset_chunk(&mut self) {
        self.chunk_sq_err = 0.0;
        self.chunk_correct = 0;
        self.chunk_seen = 0;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// Weighted global scores.
    pub scores: DVector<f64>,
    /// 1-based predicted class.
    pub class: usize,
    /// Per-member scores; `None` for members that do not vote.
    pub member_scores: Vec<Option<DVector<f64>>>,
}

/// Per-chunk counters and selection telemetry.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChunkReport {
    pub index: usize,
    pub samples: usize,
    pub accepted: usize,
    /// Prequential hits over all labeled samples in the chunk.
    pub correct: usize,
    pub members: usize,
    pub rules: usize,
    pub parameters: usize,
    pub drifts: usize,
    pub warnings: usize,
    pub merges: usize,
    pub rules_grown: usize,
    pub rules_pruned: usize,
    pub rules_recalled: usize,
    pub theta_start: f64,
    pub theta_end: f64,
    pub mask: Vec<u8>,
    pub feature_scores: Vec<f64>,
    /// Labeled samples processed in the chunk.
    pub labeled: usize,
    /// Per feature, labeled samples processed while the feature was active.
    pub active_counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub members: Vec<EnsembleMember>,
    pub detector: DriftDetector,
    pub cfg: StreamConfig,
    pub params: EnsembleParams,
    pub standardizer: RunningStandardizer,
    pub active: ActiveLearnState,
    pub mask: FeatureMask,
    pub mci: MciState,
    next_id: u64,
    /// Drift-created member still in its bootstrap phase, with the number of
    /// chunk boundaries it has crossed.
    bootstrap: Option<(u64, u32)>,
    chunks_seen: usize,
    /// Single-pass audit: samples ingested for training.
    pub samples_ingested: u64,
}

/// Multiplies wrong members' weights by `p`, right members' by `2 − p`
/// (capped at 1), then renormalizes. `correct[i] == None` leaves member `i`
/// untouched before normalization.
pub fn reward_penalize(betas: &mut [f64], correct: &[Option<bool>], p: f64) {
    for (b, c) in betas.iter_mut().zip(correct) {
        match c {
            Some(false) => *b *= p,
            Some(true) => *b = (*b * (2.0 - p)).min(1.0),
            None => {}
        }
    }
    normalize(betas);
}

pub fn normalize(betas: &mut [f64]) {
    let total: f64 = betas.iter().sum();
    if total > 0.0 {
        betas.iter_mut().for_each(|b| *b /= total);
    }
}

/// Member with the lowest chunk MSE among those that saw a labeled sample;
/// index 0 when none did.
pub fn select_winner(members: &[EnsembleMember]) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for (i, m) in members.iter().enumerate() {
        if let Some(mse) = m.chunk_mse() {
            if best.is_none_or(|(_, b)| mse < b) {
                best = Some((i, mse));
            }
        }
    }
    best.map_or(0, |(i, _)| i)
}

impl Ensemble {
    pub fn new(cfg: StreamConfig) -> Result<Self> {
        let params = EnsembleParams::from_config(&cfg);
        Self::with_params(cfg, params)
    }

    pub fn with_params(cfg: StreamConfig, params: EnsembleParams) -> Result<Self> {
        cfg.validate()?;
        let active = ActiveLearnState::new(params.active.clone())?;
        let detector = DriftDetector::new(cfg.alpha_warn, cfg.alpha_drift, params.detector_chunks * cfg.chunk_size);
        Ok(Ensemble {
            members: Vec::new(),
            detector,
            standardizer: RunningStandardizer::new(cfg.dim),
            active,
            mask: FeatureMask::all(cfg.dim),
            mci: MciState::default(),
            next_id: 0,
            bootstrap: None,
            chunks_seen: 0,
            samples_ingested: 0,
            cfg,
            params,
        })
    }

    pub fn n_members(&self) -> usize {
        self.members.len()
    }

    pub fn total_rules(&self) -> usize {
        self.members.iter().map(|m| m.model.n_rules()).sum()
    }

    pub fn betas(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.beta).collect()
    }

    pub fn ofs_enabled(&self) -> bool {
        self.cfg.ofs_b < self.cfg.dim
    }

    fn new_model(&self) -> PClassModel {
        PClassModel::new(
            self.cfg.dim,
            self.cfg.n_classes,
            self.cfg.base_kind,
            self.params.grow.clone(),
        )
    }

    /// Appends a member with `beta = 1` before normalization; returns its index.
    pub fn push_member(&mut self, model: PClassModel) -> usize {
        let member = EnsembleMember::new(self.next_id, model);
        self.next_id += 1;
        self.members.push(member);
        let mut betas = self.betas();
        normalize(&mut betas);
        for (m, b) in self.members.iter_mut().zip(betas) {
            m.beta = b;
        }
        self.members.len() - 1
    }

    pub fn all_rules(&self) -> impl Iterator<Item = &FuzzyRule> {
        self.members.iter().flat_map(|m| m.model.rules.iter())
    }

    /// Weighted vote on an already standardized input.
    pub fn predict(&self, x: &DVector<f64>) -> Result<Prediction> {
        if self.members.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        let mut scores = DVector::zeros(self.cfg.n_classes);
        let mut member_scores = Vec::with_capacity(self.members.len());
        let mut any = false;
        for m in &self.members {
            if m.votes() {
                let y = m.model.infer(x, &self.mask.active)?.scores;
                scores.axpy(m.beta, &y, 1.0);
                member_scores.push(Some(y));
                any = true;
            } else {
                member_scores.push(None);
            }
        }
        if !any {
            return Err(Error::EmptyEnsemble);
        }
        let class = argmax(&scores) + 1;
        Ok(Prediction {
            scores,
            class,
            member_scores,
        })
    }

    /// Prediction on a raw input using the frozen standardizer.
    pub fn predict_raw(&self, x: &DVector<f64>) -> Result<Prediction> {
        let z = self.standardizer.transform(x)?;
        self.predict(&z)
    }

    pub fn merge_threshold_met(&self, s: &PairSummary) -> bool {
        match self.cfg.delta_abs {
            Some(delta) => s.xi < delta,
            None => s.xi <= self.cfg.delta_rel * 0.5 * (s.var1 + s.var2),
        }
    }

    /// The most redundant qualifying pair as `(keep, drop)` member indices.
    pub fn merge_check(&self) -> Option<(usize, usize)> {
        if self.members.len() < 2 {
            return None;
        }
        let index_of = |id: u64| self.members.iter().position(|m| m.id == id);
        let mut best: Option<(usize, usize, f64)> = None;
        for s in self.mci.summaries() {
            let (Some(a), Some(b)) = (index_of(s.ids.0), index_of(s.ids.1)) else {
                continue;
            };
            if !self.merge_threshold_met(&s) {
                continue;
            }
            let scale = 0.5 * (s.var1 + s.var2);
            let ratio = if scale > 0.0 { s.xi / scale } else { 0.0 };
            if best.is_none_or(|(_, _, r)| ratio < r) {
                best = Some((a.min(b), a.max(b), ratio));
            }
        }
        best.map(|(lo, hi, _)| {
            let (acc_lo, acc_hi) = (self.members[lo].chunk_accuracy(), self.members[hi].chunk_accuracy());
            if acc_hi < acc_lo {
                (lo, hi)
            } else {
                (hi, lo)
            }
        })
    }

    fn apply_merge(&mut self, keep: usize, drop: usize) {
        let merged = (self.members[keep].beta + self.members[drop].beta).min(1.0);
        self.members[keep].beta = merged;
        let gone = self.members.remove(drop);
        self.mci.forget_member(gone.id);
        if self.bootstrap.is_some_and(|(id, _)| id == gone.id) {
            self.bootstrap = None;
        }
        let mut betas = self.betas();
        normalize(&mut betas);
        for (m, b) in self.members.iter_mut().zip(betas) {
            m.beta = b;
        }
    }

    fn train_member(&mut self, idx: usize, x: &DVector<f64>, label: usize, report: &mut ChunkReport) -> Result<()> {
        let mask = self.mask.active.clone();
        let member = &mut self.members[idx];
        let out = member.model.train_sample(x, &mask, label)?;
        member.trained += 1;
        report.rules_grown += out.grown as usize;
        report.rules_recalled += out.recalled as usize;
        report.rules_pruned += out.pruned.len();
        Ok(())
    }

    /// Processes one chunk of raw labeled samples.
    pub fn train_chunk(&mut self, chunk: &DataChunk) -> Result<ChunkReport> {
        if chunk.is_empty() {
            return Err(Error::InsufficientData("empty chunk".into()));
        }
        if self.members.is_empty() {
            let model = self.new_model();
            self.push_member(model);
        }
        let mut report = ChunkReport {
            index: chunk.index,
            samples: chunk.len(),
            theta_start: self.active.theta,
            active_counts: vec![0; self.cfg.dim],
            ..ChunkReport::default()
        };
        for sample in &chunk.samples {
            self.train_one(sample, &mut report)?;
        }
        self.finish_chunk(&mut report);
        Ok(report)
    }

    fn train_one(&mut self, sample: &Sample, report: &mut ChunkReport) -> Result<()> {
        let z = self.standardizer.standardize(&sample.x)?;
        self.samples_ingested += 1;
        let Some(label) = sample.label else {
            return Ok(());
        };
        if label == 0 || label > self.cfg.n_classes {
            return Err(Error::InsufficientData(format!(
                "label {label} outside 1..={}",
                self.cfg.n_classes
            )));
        }
        let first = self.predict(&z).ok();
        if first.as_ref().is_some_and(|p| p.class == label) {
            report.correct += 1;
        }

        let scores = ConflictScores {
            p_input: conflict_input(self.all_rules(), &z, &self.mask.active, self.cfg.n_classes),
            p_output: first.as_ref().map_or(0.5, |p| conflict_output(&p.scores)),
        };
        let decision = self.active.decide(scores);
        if decision == Decision::Accept && self.ofs_enabled() {
            let scores = feature_scores(self.all_rules(), self.cfg.dim);
            self.mask = apply_mask(&scores, self.cfg.ofs_b);
        }
        report.labeled += 1;
        for (count, &a) in report.active_counts.iter_mut().zip(self.mask.active.iter()) {
            *count += (a != 0.0) as usize;
        }
        if decision == Decision::Reject {
            return Ok(());
        }
        report.accepted += 1;

        let target = one_hot(label, self.cfg.n_classes);
        let pred = self.predict(&z).ok();

        let mut state = DriftState::Stable;
        if let Some(pred) = &pred {
            let correct: Vec<Option<bool>> = pred
                .member_scores
                .iter()
                .map(|s| s.as_ref().map(|y| argmax(y) + 1 == label))
                .collect();
            let mut betas = self.betas();
            reward_penalize(&mut betas, &correct, self.cfg.penalty);
            let mut outputs = Vec::new();
            for ((m, b), (y, c)) in self
                .members
                .iter_mut()
                .zip(betas)
                .zip(pred.member_scores.iter().zip(&correct))
            {
                m.beta = b;
                if let (Some(y), Some(c)) = (y, c) {
                    m.chunk_sq_err += (&target - y).norm_squared();
                    m.chunk_correct += *c as u64;
                    m.chunk_seen += 1;
                    outputs.push((m.id, y));
                }
            }
            self.mci.observe(&outputs);
            state = self.detector.step(if pred.class == label { 0.0 } else { 1.0 });
            match state {
                DriftState::Drift => report.drifts += 1,
                DriftState::Warning => report.warnings += 1,
                DriftState::Stable => {}
            }
        }

        let bootstrap_idx = self
            .bootstrap
            .and_then(|(id, _)| self.members.iter().position(|m| m.id == id));
        match (state, bootstrap_idx) {
            (_, Some(idx)) => self.train_member(idx, &z, label, report)?,
            (DriftState::Drift, None) => {
                let model = self.new_model();
                let idx = self.push_member(model);
                let id = self.members[idx].id;
                self.members[idx].ready = false;
                self.bootstrap = Some((id, 0));
                self.train_member(idx, &z, label, report)?;
            }
            (DriftState::Warning, None) => {}
            (DriftState::Stable, None) => {
                let w = select_winner(&self.members);
                self.train_member(w, &z, label, report)?;
            }
        }

        if self.ofs_enabled() && pred.as_ref().is_some_and(|p| p.class != label) {
            let mask = self.mask.active.clone();
            let mut rules: Vec<&mut FuzzyRule> =
                self.members.iter_mut().flat_map(|m| m.model.rules.iter_mut()).collect();
            ofs_step(&mut rules, &z, &mask, &target, &self.params.ofs);
        }
        Ok(())
    }

    fn finish_chunk(&mut self, report: &mut ChunkReport) {
        if let Some((id, crossed)) = self.bootstrap {
            let crossed = crossed + 1;
            match self.members.iter_mut().find(|m| m.id == id) {
                Some(m) if m.trained >= self.params.min_bootstrap || crossed >= 2 => {
                    m.ready = true;
                    self.bootstrap = None;
                }
                Some(_) => self.bootstrap = Some((id, crossed)),
                None => self.bootstrap = None,
            }
        }
        if let Some((keep, drop)) = self.merge_check() {
            self.apply_merge(keep, drop);
            report.merges += 1;
        }
        for m in &mut self.members {
            m.reset_chunk();
        }
        self.mci.reset();
        self.chunks_seen += 1;

        report.members = self.members.len();
        report.rules = self.total_rules();
        report.parameters = count_parameters(self);
        report.theta_end = self.active.theta;
        report.mask = self.mask.active.iter().map(|&m| m as u8).collect();
        report.feature_scores = if self.members.iter().any(|m| !m.model.rules.is_empty()) {
            feature_scores(self.all_rules(), self.cfg.dim).iter().copied().collect()
        } else {
            self.mask.scores.iter().copied().collect()
        };
    }

    pub fn snapshot_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_snapshot_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// SHA-256 of the serialized snapshot, hex encoded.
    pub fn snapshot_hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.snapshot_json()?.as_bytes());
        Ok(hex::encode(digest))
    }
}

/// Centers, dispersions and consequents of every rule plus one weight per member.
pub fn count_parameters(ens: &Ensemble) -> usize {
    let rules: usize = ens.members.iter().map(|m| m.model.parameter_count()).sum();
    rules + ens.members.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::BaseKind;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    fn cfg() -> StreamConfig {
        let mut c = StreamConfig::new(2, 2);
        c.chunk_size = 50;
        c
    }

    /// A one-rule model whose output is the constant `scores`.
    fn constant_model(scores: &[f64]) -> PClassModel {
        let mut m = PClassModel::new(2, scores.len(), BaseKind::AxisParallel, GrowPruneParams::for_chunk(50));
        m.add_rule(&v(&[0.0, 0.0]), 1, None);
        let mut w = DMatrix::zeros(3, scores.len());
        for (o, s) in scores.iter().enumerate() {
            w[(0, o)] = *s;
        }
        m.rules[0].weights = w;
        m
    }

    #[test]
    fn single_member_prediction_ignores_beta() {
        let mut e = Ensemble::new(cfg()).unwrap();
        e.push_member(constant_model(&[0.2, 0.7]));
        e.members[0].beta = 0.01;
        let p = e.predict(&v(&[0.0, 0.0])).unwrap();
        assert_eq!(p.class, 2);
    }

    #[test]
    fn heavy_member_dominates() {
        let mut e = Ensemble::new(cfg()).unwrap();
        e.push_member(constant_model(&[1.0, 0.0]));
        e.push_member(constant_model(&[0.0, 1.0]));
        e.members[0].beta = 0.9;
        e.members[1].beta = 0.1;
        assert_eq!(e.predict(&v(&[0.3, 0.3])).unwrap().class, 1);
    }

    #[test]
    fn weighted_sum_matches_hand_computation() {
        let mut e = Ensemble::new(StreamConfig::new(2, 3)).unwrap();
        e.push_member(constant_model(&[0.5, 0.2, 0.3]));
        e.push_member(constant_model(&[0.1, 0.8, 0.1]));
        e.push_member(constant_model(&[0.0, 0.3, 0.9]));
        let betas = [0.5, 0.3, 0.2];
        for (m, b) in e.members.iter_mut().zip(betas) {
            m.beta = b;
        }
        let p = e.predict(&v(&[0.0, 0.0])).unwrap();
        let expected = [
            0.5 * 0.5 + 0.3 * 0.1,
            0.5 * 0.2 + 0.3 * 0.8 + 0.2 * 0.3,
            0.5 * 0.3 + 0.3 * 0.1 + 0.2 * 0.9,
        ];
        for (got, want) in p.scores.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12);
        }
        assert_eq!(p.class, 2);
    }

    #[test]
    fn empty_ensemble_errors() {
        let e = Ensemble::new(cfg()).unwrap();
        assert!(matches!(e.predict(&v(&[0.0, 0.0])), Err(Error::EmptyEnsemble)));
    }

    #[test]
    fn reward_penalize_examples() {
        let mut b = vec![1.0, 1.0];
        reward_penalize(&mut b, &[Some(false), Some(true)], 0.5);
        assert!((b[0] - 1.0 / 3.0).abs() < 1e-15 && (b[1] - 2.0 / 3.0).abs() < 1e-15);

        let start = vec![0.2, 0.3, 0.5];
        let mut all_right = start.clone();
        reward_penalize(&mut all_right, &[Some(true); 3], 0.5);
        let mut all_wrong = start.clone();
        reward_penalize(&mut all_wrong, &[Some(false); 3], 0.5);
        for i in 0..3 {
            assert!((all_right[i] - start[i]).abs() < 1e-15);
            assert!((all_wrong[i] - start[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn select_winner_examples() {
        let mk = |mse: Option<f64>| {
            let mut m = EnsembleMember::new(0, constant_model(&[1.0, 0.0]));
            if let Some(e) = mse {
                m.chunk_seen = 10;
                m.chunk_sq_err = e * 10.0;
            }
            m
        };
        assert_eq!(select_winner(&[mk(Some(0.4))]), 0);
        assert_eq!(select_winner(&[mk(Some(0.3)), mk(Some(0.1)), mk(Some(0.2))]), 1);
        assert_eq!(select_winner(&[mk(Some(0.2)), mk(Some(0.2))]), 0);
        assert_eq!(select_winner(&[mk(None), mk(None)]), 0);
        assert_eq!(select_winner(&[mk(None), mk(Some(0.5))]), 1);
    }

    fn feed_outputs(e: &mut Ensemble, outputs: &[Vec<DVector<f64>>]) {
        for sample in outputs {
            let pairs: Vec<(u64, &DVector<f64>)> = e.members.iter().map(|m| m.id).zip(sample.iter()).collect();
            e.mci.observe(&pairs);
        }
    }

    #[test]
    fn exact_duplicates_merge_and_keep_the_more_accurate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut e = Ensemble::new(cfg()).unwrap();
        for _ in 0..3 {
            e.push_member(constant_model(&[1.0, 0.0]));
        }
        let mut outputs = Vec::new();
        for _ in 0..50 {
            let a = v(&[rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)]);
            let b = v(&[rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)]);
            // members 0 and 2 produce identical outputs; member 1 is independent
            outputs.push(vec![a.clone(), b, a]);
        }
        feed_outputs(&mut e, &outputs);
        e.members[0].chunk_seen = 50;
        e.members[0].chunk_correct = 30;
        e.members[2].chunk_seen = 50;
        e.members[2].chunk_correct = 40;
        assert_eq!(e.merge_check(), Some((2, 0)));
        let ids_before: Vec<u64> = e.members.iter().map(|m| m.id).collect();
        e.apply_merge(2, 0);
        assert_eq!(
            e.members.iter().map(|m| m.id).collect::<Vec<_>>(),
            vec![ids_before[1], ids_before[2]]
        );
        assert!((e.betas().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uncorrelated_members_never_merge() {
        let mut e = Ensemble::new(cfg()).unwrap();
        e.push_member(constant_model(&[1.0, 0.0]));
        e.push_member(constant_model(&[1.0, 0.0]));
        let signs = [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)];
        let outputs: Vec<Vec<DVector<f64>>> = (0..40)
            .map(|i| {
                let (a, b) = signs[i % 4];
                vec![v(&[a, -a]), v(&[b, -b])]
            })
            .collect();
        feed_outputs(&mut e, &outputs);
        let s = e.mci.summaries();
        assert!((s[0].xi - 0.5 * (s[0].var1 + s[0].var2)).abs() < 1e-12, "{s:?}");
        assert_eq!(e.merge_check(), None);
    }

    #[test]
    fn tie_in_accuracy_drops_lower_index() {
        let mut e = Ensemble::new(cfg()).unwrap();
        e.push_member(constant_model(&[1.0, 0.0]));
        e.push_member(constant_model(&[1.0, 0.0]));
        let outputs: Vec<Vec<DVector<f64>>> = (0..10)
            .map(|i| {
                let y = v(&[i as f64, 1.0 - i as f64]);
                vec![y.clone(), y]
            })
            .collect();
        feed_outputs(&mut e, &outputs);
        assert_eq!(e.merge_check(), Some((1, 0)));
    }

    proptest! {
        #[test]
        fn betas_stay_normalized(flags in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 4), 1..100)) {
            let mut betas = vec![0.25; 4];
            for f in flags {
                let c: Vec<Option<bool>> = f.into_iter().map(Some).collect();
                reward_penalize(&mut betas, &c, 0.5);
                prop_assert!((betas.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                prop_assert!(betas.iter().all(|&b| b > 0.0 && b <= 1.0));
            }
        }

        #[test]
        fn decision_invariant_to_beta_scale(
            s in proptest::collection::vec(-1.0f64..1.0, 6),
            b in proptest::collection::vec(0.01f64..1.0, 2),
            k in 0.01f64..100.0,
        ) {
            let mut e = Ensemble::new(StreamConfig::new(2, 3)).unwrap();
            e.push_member(constant_model(&s[..3]));
            e.push_member(constant_model(&s[3..]));
            e.members[0].beta = b[0];
            e.members[1].beta = b[1];
            let c1 = e.predict(&v(&[0.0, 0.0])).unwrap().class;
            e.members[0].beta *= k;
            e.members[1].beta *= k;
            let c2 = e.predict(&v(&[0.0, 0.0])).unwrap().class;
            prop_assert_eq!(c1, c2);
        }
    }
}
