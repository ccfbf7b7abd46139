//! The primal-dual learner: epochs, rollout, optimistic estimation, periodic
//! mixing, mirror-descent policy updates and the regularized dual update.

use log::warn;

use crate::envmodel::{sample_categorical, LinearCmdpSpec, RunStreams};
use crate::error::{Error, Result};
use crate::estimate::{
    cost_param_estimate, loss_param_passthrough, q_estimate, v_estimate, value_regression, EpochFeatureCache,
    HyperParams, RegressionAccumulator,
};
use crate::linalg::DesignMatrix;
use crate::policy::EpochPolicy;
use crate::scalar::Real;

/// `table[h][s]` is π_h(·|s).
pub type PolicyTable<T> = Vec<Vec<Vec<T>>>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition<T> {
    pub state: usize,
    pub action: usize,
    pub cost: T,
    pub next_state: usize,
}

/// Output of the backward estimation pass for one episode.
#[derive(Clone, Debug)]
pub struct BackwardPass<T> {
    pub v_f: T,
    pub v_g: T,
    /// w_{f,h} = θ̂_{f,h} + ψ̂_h V̂_{f,h+1}, per step.
    pub w_f: Vec<Vec<T>>,
    /// w_{g,h} = θ̂_{g,h} + ψ̂_h V̂_{g,h+1}, per step.
    pub w_g: Vec<Vec<T>>,
}

#[derive(Clone, Debug)]
pub struct EpisodeRecord<T> {
    /// 1-based episode index.
    pub k: usize,
    pub epoch_index: usize,
    pub trajectory: Vec<Transition<T>>,
    /// Which loss function the schedule drew (1 or 2).
    pub loss_choice: u8,
    pub loss_params: Vec<Vec<T>>,
    pub v_f_hat: T,
    pub v_g_hat: T,
    /// Y_k, the dual value used during this episode.
    pub dual: T,
    pub mixed: bool,
    pub reset: bool,
    pub w_f: Vec<Vec<T>>,
    pub w_g: Vec<Vec<T>>,
}

/// Soft-bound counters; hard bounds abort the run instead.
#[derive(Clone, Debug, Default)]
pub struct Monitors {
    pub dual_soft_violations: usize,
    pub q_bound_violations: usize,
    pub max_dual: f64,
    pub max_dual_step: f64,
}

/// Y' = [(1 − 4αηH³)Y + η(V̂_g − b − 4αH³ − 4θH²)]₊
pub fn dual_update<T: Real>(dual: T, v_hat_g: T, budget: T, hyper: &HyperParams<T>) -> T {
    let h = T::lit(hyper.horizon as f64);
    let four = T::lit(4.0);
    let shrink = T::one() - four * hyper.alpha * hyper.eta * h.powi(3);
    let drift = v_hat_g - budget - four * hyper.alpha * h.powi(3) - four * hyper.theta * h * h;
    (shrink * dual + hyper.eta * drift).max(T::zero())
}

#[derive(Clone, Debug)]
pub struct Learner<T> {
    hyper: HyperParams<T>,
    designs: Vec<DesignMatrix<T>>,
    acc: RegressionAccumulator<T>,
    cache: EpochFeatureCache<T>,
    policy: EpochPolicy<T>,
    dual: T,
    epoch_start: usize,
    epoch_index: usize,
    // Last started episode (1-based); 0 before the first.
    episode: usize,
    pending_reset: Option<bool>,
    monitors: Monitors,
}

impl<T: Real> Learner<T> {
    pub fn new(spec: &LinearCmdpSpec<T>, hyper: HyperParams<T>) -> Result<Self> {
        hyper.validate()?;
        if hyper.horizon != spec.horizon() {
            return Err(Error::InvalidHyper(format!(
                "hyperparameter horizon {} differs from environment horizon {}",
                hyper.horizon,
                spec.horizon()
            )));
        }
        if !hyper.theory_regime() || hyper.episodes < 2 || hyper.mixing_period > hyper.episodes {
            warn!(
                "theory regime H² ≤ K not met (H = {}, K = {}, mixing period {})",
                hyper.horizon, hyper.episodes, hyper.mixing_period
            );
        }
        let d = spec.dim();
        let designs = (0..spec.horizon())
            .map(|_| DesignMatrix::identity(d))
            .collect::<Result<Vec<_>>>()?;
        let cache = EpochFeatureCache::build(spec.features(), &designs, hyper.beta_w, hyper.episodes)?;
        let policy = EpochPolicy::new(spec.horizon(), spec.num_states(), spec.num_actions(), d, hyper.theta);
        Ok(Self {
            acc: RegressionAccumulator::new(spec.horizon(), d),
            hyper,
            designs,
            cache,
            policy,
            dual: T::zero(),
            epoch_start: 0,
            epoch_index: 0,
            episode: 0,
            pending_reset: None,
            monitors: Monitors::default(),
        })
    }

    pub fn hyper(&self) -> &HyperParams<T> {
        &self.hyper
    }

    pub fn dual(&self) -> T {
        self.dual
    }

    pub fn epoch_index(&self) -> usize {
        self.epoch_index
    }

    pub fn epoch_start(&self) -> usize {
        self.epoch_start
    }

    pub fn episode(&self) -> usize {
        self.episode
    }

    pub fn designs(&self) -> &[DesignMatrix<T>] {
        &self.designs
    }

    pub fn feature_cache(&self) -> &EpochFeatureCache<T> {
        &self.cache
    }

    pub fn policy(&self) -> &EpochPolicy<T> {
        &self.policy
    }

    pub fn accumulator(&self) -> &RegressionAccumulator<T> {
        &self.acc
    }

    pub fn monitors(&self) -> &Monitors {
        &self.monitors
    }

    /// Starts episode `k` if any step's design determinant has doubled since
    /// the epoch anchor (always at k = 1): uniform policy, Y = 0, new contracted features.
    pub fn maybe_start_epoch(&mut self, spec: &LinearCmdpSpec<T>, k: usize) -> Result<bool> {
        let trigger = k == 1
            || self
                .designs
                .iter()
                .enumerate()
                .any(|(h, m)| m.epoch_trigger(self.cache.anchor_logdet(h)));
        if trigger {
            self.epoch_index += 1;
            let bound = self.hyper.epoch_bound(spec.dim());
            if T::lit(self.epoch_index as f64) > bound {
                return Err(Error::EpochBoundExceeded {
                    episode: k,
                    epochs: self.epoch_index,
                    bound: bound.as_f64(),
                });
            }
            self.epoch_start = k;
            self.policy.reset_epoch(self.epoch_index);
            self.dual = T::zero();
            self.cache = EpochFeatureCache::build(spec.features(), &self.designs, self.hyper.beta_w, self.hyper.episodes)?;
        }
        Ok(trigger)
    }

    /// Begins the next episode; returns whether a new epoch started.
    pub fn start_episode(&mut self, spec: &LinearCmdpSpec<T>) -> Result<bool> {
        if self.pending_reset.is_some() {
            return Err(Error::Consistency("episode already started".into()));
        }
        let k = self.episode + 1;
        let reset = self.maybe_start_epoch(spec, k).map_err(|e| at_episode(k, e))?;
        self.episode = k;
        self.pending_reset = Some(reset);
        Ok(reset)
    }

    /// Current π_h(·|s).
    pub fn policy_probs(&mut self, h: usize, s: usize) -> Result<Vec<T>> {
        self.policy.evaluate_cached(h, s, self.cache.row(h, s))
    }

    /// The deployed policy at every (h, s).
    pub fn deployed_policy(&mut self) -> Result<PolicyTable<T>> {
        let horizon = self.policy.horizon();
        let ns = self.policy.num_states();
        (0..horizon)
            .map(|h| (0..ns).map(|s| self.policy_probs(h, s)).collect())
            .collect()
    }

    /// Plays one episode with the current policy.
    pub fn rollout(&mut self, spec: &LinearCmdpSpec<T>, streams: &mut RunStreams) -> Result<Vec<Transition<T>>> {
        let mut s = spec.initial_state();
        let mut trajectory = Vec::with_capacity(spec.horizon());
        for h in 0..spec.horizon() {
            let probs = self.policy_probs(h, s)?;
            let a = sample_categorical(&probs, &mut streams.actions);
            let next = spec.sample_transition(h, s, a, &mut streams.transitions);
            let cost = spec.sample_cost(h, s, a, next, &mut streams.costs);
            trajectory.push(Transition {
                state: s,
                action: a,
                cost,
                next_state: next,
            });
            s = next;
        }
        Ok(trajectory)
    }

    /// Backward estimation with Λ_h^k and data from episodes before k.
    /// Value tables are computed only on states that occur as regression
    /// targets (plus s₁ at the first step).
    pub fn backward_pass(&mut self, spec: &LinearCmdpSpec<T>, loss_params: &[Vec<T>]) -> Result<BackwardPass<T>> {
        let horizon = spec.horizon();
        let ns = spec.num_states();
        let na = spec.num_actions();
        let beta_b = self.hyper.beta_b;
        let mut next_f: Vec<Option<T>> = vec![Some(T::zero()); ns];
        let mut next_g: Vec<Option<T>> = vec![Some(T::zero()); ns];
        let mut w_f_all = vec![Vec::new(); horizon];
        let mut w_g_all = vec![Vec::new(); horizon];
        let mut q_f = vec![T::zero(); na];
        let mut q_g = vec![T::zero(); na];

        for h in (0..horizon).rev() {
            let design = &self.designs[h];
            let step = self.acc.step(h);
            let theta_f = loss_param_passthrough(&loss_params[h]);
            let theta_g = cost_param_estimate(design, &step.cost_rhs);
            let psi_v_f = value_regression(design, &step.next_state_features, |s| next_f[s])?;
            let psi_v_g = value_regression(design, &step.next_state_features, |s| next_g[s])?;
            let w_f: Vec<T> = theta_f.iter().zip(&psi_v_f).map(|(a, b)| *a + *b).collect();
            let w_g: Vec<T> = theta_g.iter().zip(&psi_v_g).map(|(a, b)| *a + *b).collect();

            let states: Vec<usize> = if h == 0 {
                vec![spec.initial_state()]
            } else {
                self.acc.step(h - 1).next_state_features.keys().copied().collect()
            };
            let mut cur_f = vec![None; ns];
            let mut cur_g = vec![None; ns];
            let bound = self.hyper.q_bound(h);
            for s in states {
                let row = self.cache.row(h, s);
                for a in 0..na {
                    q_f[a] = q_estimate(&row[a], &w_f, beta_b);
                    q_g[a] = q_estimate(&row[a], &w_g, beta_b);
                }
                if q_f.iter().chain(&q_g).any(|q| !q.is_finite()) {
                    return Err(Error::NonFinite {
                        episode: self.episode,
                        what: "Q estimate",
                    });
                }
                if q_f.iter().chain(&q_g).any(|q| q.abs() > bound) {
                    if self.monitors.q_bound_violations == 0 {
                        warn!("episode {}: |Q̂| exceeds 2(H−h+1) at step {h}", self.episode);
                    }
                    self.monitors.q_bound_violations += 1;
                }
                let pi = self.policy.evaluate_cached(h, s, row)?;
                cur_f[s] = Some(v_estimate(&pi, &q_f));
                cur_g[s] = Some(v_estimate(&pi, &q_g));
            }
            next_f = cur_f;
            next_g = cur_g;
            w_f_all[h] = w_f;
            w_g_all[h] = w_g;
        }
        let s1 = spec.initial_state();
        let (v_f, v_g) = (next_f[s1].unwrap_or(T::zero()), next_g[s1].unwrap_or(T::zero()));
        if !v_f.is_finite() || !v_g.is_finite() {
            return Err(Error::NonFinite {
                episode: self.episode,
                what: "value estimate",
            });
        }
        Ok(BackwardPass {
            v_f,
            v_g,
            w_f: w_f_all,
            w_g: w_g_all,
        })
    }

    /// Finishes the episode begun by [`start_episode`](Self::start_episode):
    /// rollout, estimation, mixing, policy step, dual step, then data updates.
    pub fn complete_episode(&mut self, spec: &LinearCmdpSpec<T>, streams: &mut RunStreams) -> Result<EpisodeRecord<T>> {
        let reset = self
            .pending_reset
            .take()
            .ok_or_else(|| Error::Consistency("complete_episode without start_episode".into()))?;
        let k = self.episode;
        self.finish(spec, streams, k, reset).map_err(|e| at_episode(k, e))
    }

    fn finish(
        &mut self,
        spec: &LinearCmdpSpec<T>,
        streams: &mut RunStreams,
        k: usize,
        reset: bool,
    ) -> Result<EpisodeRecord<T>> {
        let draw = spec.loss_schedule().draw(k, &mut streams.losses);
        let (loss_choice, loss_params) = (draw.which, draw.params.to_vec());
        let trajectory = self.rollout(spec, streams)?;
        let est = self.backward_pass(spec, &loss_params)?;

        let mixed = (k - self.epoch_start) % self.hyper.mixing_period == 0;
        let dual = self.dual;
        for h in 0..spec.horizon() {
            if mixed {
                self.policy.mark_mixing(h);
            }
            self.policy
                .append_episode(h, &est.w_f[h], &est.w_g[h], dual, self.hyper.alpha, self.hyper.beta_b);
        }

        let next_dual = dual_update(dual, est.v_g, spec.budget(), &self.hyper);
        let step = (next_dual - dual).abs();
        let step_bound = self.hyper.dual_step_bound();
        if step > step_bound {
            return Err(Error::DualStepExceeded {
                episode: k,
                step: step.as_f64(),
                bound: step_bound.as_f64(),
            });
        }
        if next_dual > self.hyper.dual_soft_bound() {
            if self.monitors.dual_soft_violations == 0 {
                warn!("episode {k}: dual {next_dual} exceeds 11ηH³K");
            }
            self.monitors.dual_soft_violations += 1;
        }
        self.monitors.max_dual = self.monitors.max_dual.max(next_dual.as_f64());
        self.monitors.max_dual_step = self.monitors.max_dual_step.max(step.as_f64());
        self.dual = next_dual;

        for (h, t) in trajectory.iter().enumerate() {
            let phi = spec.features().get(t.state, t.action);
            self.designs[h].rank_one_update(phi);
            self.acc.record(h, phi, t.cost, t.next_state);
        }

        Ok(EpisodeRecord {
            k,
            epoch_index: self.epoch_index,
            trajectory,
            loss_choice,
            loss_params,
            v_f_hat: est.v_f,
            v_g_hat: est.v_g,
            dual,
            mixed,
            reset,
            w_f: est.w_f,
            w_g: est.w_g,
        })
    }

    /// One full episode.
    pub fn step(&mut self, spec: &LinearCmdpSpec<T>, streams: &mut RunStreams) -> Result<EpisodeRecord<T>> {
        self.start_episode(spec)?;
        self.complete_episode(spec, streams)
    }

    /// Runs `episodes` episodes and collects every record.
    pub fn run(
        &mut self,
        spec: &LinearCmdpSpec<T>,
        episodes: usize,
        streams: &mut RunStreams,
    ) -> Result<Vec<EpisodeRecord<T>>> {
        (0..episodes).map(|_| self.step(spec, streams)).collect()
    }
}

fn at_episode(k: usize, e: Error) -> Error {
    match e {
        e @ (Error::NonFinite { .. }
        | Error::DualStepExceeded { .. }
        | Error::EpochBoundExceeded { .. }
        | Error::AtEpisode { .. }) => e,
        other => Error::AtEpisode {
            episode: k,
            source: Box::new(other),
        },
    }
}
