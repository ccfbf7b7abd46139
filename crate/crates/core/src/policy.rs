//! Weighted LogSumExp softmax policies in segment form.
//!
//! Within an epoch the policy at step h is determined by a sequence of
//! segments. Segment i carries an accumulated weight vector `W_i` and bonus
//! coefficient `B_i`; its exponent at (s, a) is `φ̄ᵀW_i + B_i ν̄`. The policy is
//! the fold: start uniform, and for each segment optionally mix with uniform at
//! weight θ (when the segment was opened by a mixing boundary), multiply by the
//! exponentiated segment exponent, renormalize.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{q_estimate, ContractedFeature};
use crate::scalar::{axpy, dot, Real};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicySegment<T> {
    /// −α Σ_j (w_f^j + Y_j w_g^j).
    pub weights: Vec<T>,
    /// α β_b Σ_j (1 + Y_j).
    pub bonus: T,
    /// Mix with uniform before applying this segment's exponent.
    pub mixed: bool,
    pub episodes: usize,
}

impl<T: Real> PolicySegment<T> {
    fn empty(dim: usize, mixed: bool) -> Self {
        Self {
            weights: vec![T::zero(); dim],
            bonus: T::zero(),
            mixed,
            episodes: 0,
        }
    }

    #[inline]
    pub fn exponent(&self, feature: &ContractedFeature<T>) -> T {
        dot(&feature.phi_bar, &self.weights) + self.bonus * feature.nu_bar
    }
}

#[derive(Clone, Debug)]
struct PrefixCache<T> {
    folded: usize,
    log_probs: Vec<T>,
}

#[derive(Clone, Debug)]
struct StepPolicy<T> {
    closed: Vec<PolicySegment<T>>,
    open: PolicySegment<T>,
    // Per state: log-probabilities after folding the first `folded` closed segments.
    prefix: Vec<Option<PrefixCache<T>>>,
}

/// Per-step segment policies for the current epoch.
#[derive(Clone, Debug)]
pub struct EpochPolicy<T> {
    steps: Vec<StepPolicy<T>>,
    theta: T,
    num_states: usize,
    num_actions: usize,
    dim: usize,
    epoch: usize,
}

impl<T: Real> EpochPolicy<T> {
    pub fn new(horizon: usize, num_states: usize, num_actions: usize, dim: usize, theta: T) -> Self {
        let step = StepPolicy {
            closed: Vec::new(),
            open: PolicySegment::empty(dim, false),
            prefix: vec![None; num_states],
        };
        Self {
            steps: vec![step; horizon],
            theta,
            num_states,
            num_actions,
            dim,
            epoch: 0,
        }
    }

    pub fn horizon(&self) -> usize {
        self.steps.len()
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    /// Back to uniform at every step and state.
    pub fn reset_epoch(&mut self, epoch: usize) {
        self.epoch = epoch;
        for step in &mut self.steps {
            step.closed.clear();
            step.open = PolicySegment::empty(self.dim, false);
            step.prefix.iter_mut().for_each(|p| *p = None);
        }
    }

    /// Folds one episode's mirror-descent step into the open segment.
    pub fn append_episode(&mut self, h: usize, w_f: &[T], w_g: &[T], dual: T, alpha: T, beta_b: T) {
        let open = &mut self.steps[h].open;
        axpy(&mut open.weights, -alpha, w_f);
        axpy(&mut open.weights, -alpha * dual, w_g);
        open.bonus = open.bonus + alpha * beta_b * (T::one() + dual);
        open.episodes += 1;
    }

    /// Closes the open segment at a mixing boundary; the next segment starts mixed.
    pub fn mark_mixing(&mut self, h: usize) {
        let step = &mut self.steps[h];
        let fresh = PolicySegment::empty(self.dim, true);
        step.closed.push(std::mem::replace(&mut step.open, fresh));
    }

    pub fn closed_segments(&self, h: usize) -> &[PolicySegment<T>] {
        &self.steps[h].closed
    }

    pub fn open_segment(&self, h: usize) -> &PolicySegment<T> {
        &self.steps[h].open
    }

    /// π(·|s) at step h by a full fold over all segments. `row` holds the
    /// contracted features of s for every action.
    pub fn evaluate(&self, h: usize, row: &[ContractedFeature<T>]) -> Result<Vec<T>> {
        let step = &self.steps[h];
        let mut log_probs = uniform_log(self.num_actions);
        fold(&mut log_probs, step.closed.iter().chain(std::iter::once(&step.open)), row, self.theta)?;
        Ok(to_probs(&log_probs))
    }

    /// Same as [`evaluate`](Self::evaluate) but reuses the folded prefix of
    /// closed segments for state `s`, which only changes at mixing boundaries.
    pub fn evaluate_cached(&mut self, h: usize, s: usize, row: &[ContractedFeature<T>]) -> Result<Vec<T>> {
        let theta = self.theta;
        let na = self.num_actions;
        let step = &mut self.steps[h];
        let entry = step.prefix[s].get_or_insert_with(|| PrefixCache {
            folded: 0,
            log_probs: uniform_log(na),
        });
        if entry.folded < step.closed.len() {
            fold(&mut entry.log_probs, step.closed[entry.folded..].iter(), row, theta)?;
            entry.folded = step.closed.len();
        }
        let mut log_probs = entry.log_probs.clone();
        fold(&mut log_probs, std::iter::once(&step.open), row, theta)?;
        Ok(to_probs(&log_probs))
    }

    pub fn snapshot(&self) -> PolicySnapshot<T> {
        PolicySnapshot {
            epoch: self.epoch,
            theta: self.theta,
            num_actions: self.num_actions,
            steps: self
                .steps
                .iter()
                .map(|s| s.closed.iter().cloned().chain(std::iter::once(s.open.clone())).collect())
                .collect(),
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }
}

/// Serializable policy: epoch id, mixing weight, and per-step segment lists
/// (closed segments followed by the open one). Evaluating it requires the
/// contracted features of the same epoch anchor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicySnapshot<T> {
    pub epoch: usize,
    pub theta: T,
    pub num_actions: usize,
    pub steps: Vec<Vec<PolicySegment<T>>>,
}

impl<T: Real> PolicySnapshot<T> {
    pub fn evaluate(&self, h: usize, row: &[ContractedFeature<T>]) -> Result<Vec<T>> {
        let mut log_probs = uniform_log(self.num_actions);
        fold(&mut log_probs, self.steps[h].iter(), row, self.theta)?;
        Ok(to_probs(&log_probs))
    }
}

fn uniform_log<T: Real>(n: usize) -> Vec<T> {
    vec![-T::lit(n as f64).ln(); n]
}

fn fold<'a, T: Real>(
    log_probs: &mut [T],
    segments: impl Iterator<Item = &'a PolicySegment<T>>,
    row: &[ContractedFeature<T>],
    theta: T,
) -> Result<()> {
    let n = T::lit(log_probs.len() as f64);
    let floor = theta / n;
    for seg in segments {
        if seg.mixed {
            for lp in log_probs.iter_mut() {
                let mixed = (T::one() - theta) * lp.exp() + floor;
                debug_assert!(mixed >= floor);
                *lp = mixed.ln();
            }
        }
        for (lp, feature) in log_probs.iter_mut().zip(row) {
            let x = seg.exponent(feature);
            if !x.is_finite() {
                return Err(Error::Consistency(format!("non-finite policy exponent {x}")));
            }
            *lp = *lp + x;
        }
        normalize_log(log_probs);
    }
    Ok(())
}

fn normalize_log<T: Real>(log_probs: &mut [T]) {
    let max = log_probs.iter().copied().fold(T::neg_infinity(), T::max);
    let lse = max + log_probs.iter().map(|&x| (x - max).exp()).sum::<T>().ln();
    for lp in log_probs.iter_mut() {
        *lp = *lp - lse;
    }
}

fn to_probs<T: Real>(log_probs: &[T]) -> Vec<T> {
    let mut p: Vec<T> = log_probs.iter().map(|x| x.exp()).collect();
    let total: T = p.iter().copied().sum();
    p.iter_mut().for_each(|x| *x = *x / total);
    p
}

/// One episode's contribution at a fixed step, for literal replay.
#[derive(Clone, Debug)]
pub struct ReplayEntry<T> {
    pub w_f: Vec<T>,
    pub w_g: Vec<T>,
    pub dual: T,
    pub mixed: bool,
}

/// Reference evaluation by replaying the per-episode updates one at a time:
/// optionally mix, then multiply by exp(−α(Q̂_f + Y Q̂_g)) and renormalize.
/// Independent of the segment accumulation; used to check it.
pub fn evaluate_by_replay<T: Real>(
    log: &[ReplayEntry<T>],
    row: &[ContractedFeature<T>],
    alpha: T,
    beta_b: T,
    theta: T,
) -> Vec<T> {
    let n = row.len();
    let unif = T::one() / T::lit(n as f64);
    let mut p = vec![unif; n];
    for e in log {
        if e.mixed {
            p.iter_mut().for_each(|x| *x = (T::one() - theta) * *x + theta * unif);
        }
        let expo: Vec<T> = row
            .iter()
            .map(|f| -alpha * (q_estimate(f, &e.w_f, beta_b) + e.dual * q_estimate(f, &e.w_g, beta_b)))
            .collect();
        let max = expo.iter().copied().fold(T::neg_infinity(), T::max);
        for (x, z) in p.iter_mut().zip(&expo) {
            *x = *x * (*z - max).exp();
        }
        let total: T = p.iter().copied().sum();
        p.iter_mut().for_each(|x| *x = *x / total);
    }
    p
}
