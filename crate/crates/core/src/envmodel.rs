//! Finite-horizon linear CMDPs: feature maps, transition measures, cost and
//! loss models, declarative configs, and the job-scheduling preset.
//!
//! Steps are 0-based throughout the API: step `h` ranges over `0..horizon`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{dot, norm2, Real};

/// Known feature map φ(s, a) ∈ ℝ^d, stored densely per state-action pair.
#[derive(Clone, Debug)]
pub struct FeatureMap<T> {
    dim: usize,
    num_states: usize,
    num_actions: usize,
    table: Vec<Vec<T>>,
}

impl<T: Real> FeatureMap<T> {
    /// One-hot featurization with `d = |S|·|A|`; φ(s, a) = e_{s·|A| + a}.
    pub fn tabular(num_states: usize, num_actions: usize) -> Self {
        assert!(num_states >= 1 && num_actions >= 1, "empty state or action set");
        let dim = num_states * num_actions;
        let table = (0..dim)
            .map(|i| {
                let mut v = vec![T::zero(); dim];
                v[i] = T::one();
                v
            })
            .collect();
        Self {
            dim,
            num_states,
            num_actions,
            table,
        }
    }

    /// General feature table indexed by `s·|A| + a`. Rejects any vector with ‖φ‖₂ > 1.
    pub fn from_table(num_states: usize, num_actions: usize, table: Vec<Vec<T>>) -> Result<Self> {
        if num_states == 0 || num_actions == 0 {
            return Err(Error::InvalidSpec("empty state or action set".into()));
        }
        if table.len() != num_states * num_actions {
            return Err(Error::InvalidSpec(format!(
                "feature table has {} rows, expected {}",
                table.len(),
                num_states * num_actions
            )));
        }
        let dim = table[0].len();
        if dim == 0 {
            return Err(Error::InvalidSpec("feature dimension must be positive".into()));
        }
        for (i, v) in table.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::InvalidSpec(format!("feature row {i} has wrong length")));
            }
            if norm2(v) > T::one() + T::identity_tol() {
                return Err(Error::InvalidSpec(format!("feature row {i} has norm above 1")));
            }
        }
        Ok(Self {
            dim,
            num_states,
            num_actions,
            table,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    #[inline]
    pub fn index(&self, s: usize, a: usize) -> usize {
        s * self.num_actions + a
    }

    #[inline]
    pub fn get(&self, s: usize, a: usize) -> &[T] {
        &self.table[self.index(s, a)]
    }
}

/// How a cost sample is produced from a transition.
#[derive(Clone, Debug)]
pub enum CostModel<T> {
    /// `g = 1 − (s − s')/scale`: deterministic given the next state.
    Progress { scale: T },
    /// Bernoulli draw with mean φ(s,a)ᵀθ_{g,h}.
    Bernoulli,
}

#[derive(Clone, Debug)]
pub enum LossVariant<T> {
    /// Same loss parameters every episode.
    Fixed(Vec<Vec<T>>),
    /// Episode k uses `f1` with probability `0.9 − 0.9(k−1)/(K−1)`, else `f2`.
    TwoFunctionDrift { f1: Vec<Vec<T>>, f2: Vec<Vec<T>> },
}

/// Adversarial loss schedule: per-step parameter vectors θ_{f,h}^k.
#[derive(Clone, Debug)]
pub struct LossSchedule<T> {
    variant: LossVariant<T>,
    episodes: usize,
}

/// One realized draw from a [`LossSchedule`].
#[derive(Clone, Copy, Debug)]
pub struct LossDraw<'a, T> {
    /// 1 or 2 for the drift schedule, always 1 for a fixed one.
    pub which: u8,
    pub params: &'a [Vec<T>],
}

impl<T: Real> LossSchedule<T> {
    pub fn new(variant: LossVariant<T>, episodes: usize) -> Self {
        Self { variant, episodes }
    }

    pub fn variant(&self) -> &LossVariant<T> {
        &self.variant
    }

    pub fn episodes(&self) -> usize {
        self.episodes
    }

    /// Probability of drawing the first function at (1-based) episode `k`.
    pub fn drift_probability(&self, k: usize) -> f64 {
        if self.episodes <= 1 {
            return 0.9;
        }
        let frac = (k.saturating_sub(1)) as f64 / (self.episodes - 1) as f64;
        (0.9 - 0.9 * frac).clamp(0.0, 0.9)
    }

    /// Draws θ_{f,·}^k for 1-based episode `k`. Consumes exactly one uniform
    /// from `rng` for the drift variant and none for the fixed one.
    pub fn draw<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> LossDraw<'_, T> {
        match &self.variant {
            LossVariant::Fixed(f) => LossDraw { which: 1, params: f },
            LossVariant::TwoFunctionDrift { f1, f2 } => {
                let u: f64 = rng.random();
                if u < self.drift_probability(k) {
                    LossDraw { which: 1, params: f1 }
                } else {
                    LossDraw { which: 2, params: f2 }
                }
            }
        }
    }

    fn tables(&self) -> Vec<&[Vec<T>]> {
        match &self.variant {
            LossVariant::Fixed(f) => vec![f],
            LossVariant::TwoFunctionDrift { f1, f2 } => vec![f1, f2],
        }
    }
}

/// Ground-truth finite-horizon linear CMDP.
#[derive(Clone, Debug)]
pub struct LinearCmdpSpec<T> {
    horizon: usize,
    features: FeatureMap<T>,
    psi: Vec<Vec<Vec<T>>>,
    theta_g: Vec<Vec<T>>,
    cost_model: CostModel<T>,
    loss_schedule: LossSchedule<T>,
    budget: T,
    initial_state: usize,
    // P_h(·|s,a) cached per (h, s, a).
    kernel: Vec<Vec<T>>,
}

/// Constructor arguments for [`LinearCmdpSpec::new`].
#[derive(Clone, Debug)]
pub struct SpecParts<T> {
    pub horizon: usize,
    pub features: FeatureMap<T>,
    /// `psi[h][s']` is ψ_h(s') ∈ ℝ^d.
    pub psi: Vec<Vec<Vec<T>>>,
    /// `theta_g[h]` is θ_{g,h} ∈ ℝ^d.
    pub theta_g: Vec<Vec<T>>,
    pub cost_model: CostModel<T>,
    pub loss_schedule: LossSchedule<T>,
    pub budget: T,
    pub initial_state: usize,
}

impl<T: Real> LinearCmdpSpec<T> {
    pub fn new(parts: SpecParts<T>) -> Result<Self> {
        let SpecParts {
            horizon,
            features,
            psi,
            theta_g,
            cost_model,
            loss_schedule,
            budget,
            initial_state,
        } = parts;
        let ns = features.num_states();
        let na = features.num_actions();
        let d = features.dim();
        let tol = T::identity_tol();
        let sqrt_d = T::lit(d as f64).sqrt();
        let bad = |msg: String| Err(Error::InvalidSpec(msg));

        if horizon == 0 {
            return bad("horizon must be positive".into());
        }
        if initial_state >= ns {
            return bad(format!("initial state {initial_state} out of range"));
        }
        if budget < T::zero() || budget > T::lit(horizon as f64) {
            return bad(format!("budget {budget} outside [0, H]"));
        }
        if psi.len() != horizon || theta_g.len() != horizon {
            return bad("psi and theta_g need one entry per step".into());
        }
        for h in 0..horizon {
            if psi[h].len() != ns || psi[h].iter().any(|v| v.len() != d) {
                return bad(format!("psi[{h}] has wrong shape"));
            }
            if theta_g[h].len() != d {
                return bad(format!("theta_g[{h}] has wrong length"));
            }
            let mut abs_sum = vec![T::zero(); d];
            for v in &psi[h] {
                for (acc, &x) in abs_sum.iter_mut().zip(v) {
                    *acc = *acc + x.abs();
                }
            }
            if norm2(&abs_sum) > sqrt_d + tol {
                return bad(format!("‖Σ|ψ_{h}|‖₂ exceeds √d"));
            }
            if norm2(&theta_g[h]) > sqrt_d + tol {
                return bad(format!("‖θ_g,{h}‖₂ exceeds √d"));
            }
        }
        for table in loss_schedule.tables() {
            if table.len() != horizon || table.iter().any(|v| v.len() != d) {
                return bad("loss parameters have wrong shape".into());
            }
            for (h, theta) in table.iter().enumerate() {
                if norm2(theta) > sqrt_d + tol {
                    return bad(format!("‖θ_f,{h}‖₂ exceeds √d"));
                }
                for s in 0..ns {
                    for a in 0..na {
                        let f = dot(features.get(s, a), theta);
                        if f < -tol || f > T::one() + tol {
                            return bad(format!("loss {f} at (h={h}, s={s}, a={a}) outside [0,1]"));
                        }
                    }
                }
            }
        }

        let mut kernel = Vec::with_capacity(horizon * ns * na);
        for h in 0..horizon {
            for s in 0..ns {
                for a in 0..na {
                    let phi = features.get(s, a);
                    let row: Vec<T> = psi[h].iter().map(|v| dot(phi, v)).collect();
                    let total: T = row.iter().copied().sum();
                    if (total - T::one()).abs() > tol {
                        return bad(format!(
                            "transition row (h={h}, s={s}, a={a}) sums to {total}"
                        ));
                    }
                    if let Some(p) = row.iter().find(|&&p| p < -tol || p > T::one() + tol) {
                        return bad(format!("transition probability {p} outside [0,1]"));
                    }
                    let g = dot(phi, &theta_g[h]);
                    if g < -tol || g > T::one() + tol {
                        return bad(format!("mean cost {g} at (h={h}, s={s}, a={a}) outside [0,1]"));
                    }
                    if let CostModel::Progress { scale } = cost_model {
                        for (sp, &p) in row.iter().enumerate() {
                            let c = progress_cost(s, sp, scale);
                            if p > tol && (c < T::zero() || c > T::one()) {
                                return bad(format!("progress cost {c} for {s}->{sp} outside [0,1]"));
                            }
                        }
                    }
                    kernel.push(row);
                }
            }
        }

        Ok(Self {
            horizon,
            features,
            psi,
            theta_g,
            cost_model,
            loss_schedule,
            budget,
            initial_state,
            kernel,
        })
    }

    /// Builds a spec with one-hot features from explicit tables.
    /// `kernel[h][s][a][s']` and `mean_cost[h][s][a]`; loss tables in the
    /// schedule must already be in feature space (see [`tabular_loss`]).
    pub fn tabular(
        kernel: &[Vec<Vec<Vec<T>>>],
        mean_cost: &[Vec<Vec<T>>],
        cost_model: CostModel<T>,
        loss_schedule: LossSchedule<T>,
        budget: T,
        initial_state: usize,
    ) -> Result<Self> {
        let horizon = kernel.len();
        if horizon == 0 || kernel[0].is_empty() || kernel[0][0].is_empty() {
            return Err(Error::InvalidSpec("empty tabular kernel".into()));
        }
        let ns = kernel[0].len();
        let na = kernel[0][0].len();
        let features = FeatureMap::tabular(ns, na);
        let d = features.dim();
        if mean_cost.len() != horizon {
            return Err(Error::InvalidSpec("mean cost needs one table per step".into()));
        }
        let mut psi = vec![vec![vec![T::zero(); d]; ns]; horizon];
        let mut theta_g = vec![vec![T::zero(); d]; horizon];
        for h in 0..horizon {
            if kernel[h].len() != ns || mean_cost[h].len() != ns {
                return Err(Error::InvalidSpec(format!("step {h} tables have wrong state count")));
            }
            for s in 0..ns {
                if kernel[h][s].len() != na || mean_cost[h][s].len() != na {
                    return Err(Error::InvalidSpec(format!("step {h} tables have wrong action count")));
                }
                for a in 0..na {
                    let idx = features.index(s, a);
                    if kernel[h][s][a].len() != ns {
                        return Err(Error::InvalidSpec(format!("kernel row ({h},{s},{a}) has wrong length")));
                    }
                    for (sp, &p) in kernel[h][s][a].iter().enumerate() {
                        psi[h][sp][idx] = p;
                    }
                    theta_g[h][idx] = mean_cost[h][s][a];
                }
            }
        }
        Self::new(SpecParts {
            horizon,
            features,
            psi,
            theta_g,
            cost_model,
            loss_schedule,
            budget,
            initial_state,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_states(&self) -> usize {
        self.features.num_states()
    }

    pub fn num_actions(&self) -> usize {
        self.features.num_actions()
    }

    pub fn dim(&self) -> usize {
        self.features.dim()
    }

    pub fn features(&self) -> &FeatureMap<T> {
        &self.features
    }

    pub fn psi(&self, h: usize) -> &[Vec<T>] {
        &self.psi[h]
    }

    pub fn theta_g(&self, h: usize) -> &[T] {
        &self.theta_g[h]
    }

    pub fn cost_model(&self) -> &CostModel<T> {
        &self.cost_model
    }

    pub fn loss_schedule(&self) -> &LossSchedule<T> {
        &self.loss_schedule
    }

    pub fn budget(&self) -> T {
        self.budget
    }

    pub fn initial_state(&self) -> usize {
        self.initial_state
    }

    /// P_h(·|s, a) as a probability vector over next states.
    #[inline]
    pub fn transition_probs(&self, h: usize, s: usize, a: usize) -> &[T] {
        let ns = self.num_states();
        let na = self.num_actions();
        &self.kernel[(h * ns + s) * na + a]
    }

    pub fn sample_transition<R: Rng + ?Sized>(&self, h: usize, s: usize, a: usize, rng: &mut R) -> usize {
        sample_categorical(self.transition_probs(h, s, a), rng)
    }

    /// g_h(s, a) = φ(s,a)ᵀθ_{g,h}.
    pub fn mean_cost(&self, h: usize, s: usize, a: usize) -> T {
        dot(self.features.get(s, a), &self.theta_g[h])
    }

    /// Observed (bandit) cost for the transition `s --a--> s'` at step `h`.
    pub fn sample_cost<R: Rng + ?Sized>(&self, h: usize, s: usize, a: usize, next: usize, rng: &mut R) -> T {
        match self.cost_model {
            CostModel::Progress { scale } => progress_cost(s, next, scale),
            CostModel::Bernoulli => {
                let u: f64 = rng.random();
                if u < self.mean_cost(h, s, a).as_f64() {
                    T::one()
                } else {
                    T::zero()
                }
            }
        }
    }

    /// f_h(s, a) = φ(s,a)ᵀθ_{f,h} for a given set of loss parameters.
    pub fn loss_value(&self, params: &[Vec<T>], h: usize, s: usize, a: usize) -> T {
        dot(self.features.get(s, a), &params[h])
    }
}

fn progress_cost<T: Real>(s: usize, next: usize, scale: T) -> T {
    T::one() - (T::lit(s as f64) - T::lit(next as f64)) / scale
}

/// Converts a `[h][s][a]` loss table into per-step one-hot feature parameters.
pub fn tabular_loss<T: Real>(table: &[Vec<Vec<T>>]) -> Vec<Vec<T>> {
    table
        .iter()
        .map(|step| step.iter().flat_map(|row| row.iter().copied()).collect())
        .collect()
}

/// Draws an index with probability proportional to `probs` by walking the
/// cumulative distribution with one uniform.
pub fn sample_categorical<T: Real, R: Rng + ?Sized>(probs: &[T], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    let mut last_positive = 0;
    for (i, p) in probs.iter().enumerate() {
        let p = p.as_f64();
        if p > 0.0 {
            last_positive = i;
        }
        cum += p;
        if u < cum {
            return i;
        }
    }
    last_positive
}

/// Randomness roles within a run. Each role gets its own ChaCha stream derived
/// from the run seed, so changing how one role consumes randomness leaves the
/// others untouched.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamRole {
    Transitions = 0,
    Losses = 1,
    Costs = 2,
    Actions = 3,
}

#[derive(Clone, Debug)]
pub struct RunStreams {
    pub transitions: ChaCha8Rng,
    pub losses: ChaCha8Rng,
    pub costs: ChaCha8Rng,
    pub actions: ChaCha8Rng,
}

impl RunStreams {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            transitions: stream(seed, StreamRole::Transitions),
            losses: stream(seed, StreamRole::Losses),
            costs: stream(seed, StreamRole::Costs),
            actions: stream(seed, StreamRole::Actions),
        }
    }
}

pub fn stream(seed: u64, role: StreamRole) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(role as u64);
    rng
}

// ---------------------------------------------------------------------------
// Declarative configuration
// ---------------------------------------------------------------------------

pub const JOB_SCHEDULING_V1: &str = "job-scheduling-v1";

pub type Table3 = Vec<Vec<Vec<f64>>>;

/// Environment config: either a named preset or an inline definition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EnvConfig {
    Preset { preset: String },
    Inline(InlineEnv),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineEnv {
    pub horizon: usize,
    pub states: usize,
    pub actions: usize,
    pub transition: TransitionRule,
    pub cost: CostRule,
    pub loss_schedule: LossScheduleRule,
    pub budget: f64,
    pub initial_state: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TransitionRule {
    /// Action 0 idles (s' = s); action 1 moves to max(s − decrement, 0)
    /// with the listed probabilities.
    JobProgress { outcomes: Vec<ProgressOutcome> },
    /// Explicit `kernel[h][s][a][s']`.
    Tabular { kernel: Table3Kernel },
}

pub type Table3Kernel = Vec<Vec<Vec<Vec<f64>>>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProgressOutcome {
    pub decrement: usize,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CostRule {
    /// g = 1 − (s − s')/scale.
    JobProgress { scale: f64 },
    /// Bernoulli cost with mean table `[h][s][a]`.
    Bernoulli { mean: Table3 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LossScheduleRule {
    Fixed { loss: Table3 },
    TwoFunctionDrift { f1: Table3, f2: Table3 },
}

impl EnvConfig {
    pub fn resolve(&self) -> Result<InlineEnv> {
        match self {
            EnvConfig::Preset { preset } if preset == JOB_SCHEDULING_V1 => Ok(InlineEnv::job_scheduling_v1()),
            EnvConfig::Preset { preset } => Err(Error::InvalidSpec(format!("unknown preset {preset:?}"))),
            EnvConfig::Inline(env) => Ok(env.clone()),
        }
    }

    /// Builds the ground-truth spec for a run of `episodes` episodes.
    pub fn build<T: Real>(&self, episodes: usize) -> Result<LinearCmdpSpec<T>> {
        self.resolve()?.build(episodes)
    }
}

impl InlineEnv {
    /// Job scheduling: 10 job counts, idle/process actions, H = 10, s₁ = 9,
    /// budget 5.6, drifting choice between two step-dependent loss functions.
    pub fn job_scheduling_v1() -> Self {
        let horizon = 10;
        let states = 10;
        // Steps are 0-based here; peak-loss steps {3,4,5,6} and {4,5,6} are 1-based.
        let loss = |peak: &[usize], peak_value: f64| -> Table3 {
            (0..horizon)
                .map(|h| {
                    let process = if peak.contains(&(h + 1)) { peak_value } else { 0.2 };
                    vec![vec![1.0, process]; states]
                })
                .collect()
        };
        InlineEnv {
            horizon,
            states,
            actions: 2,
            transition: TransitionRule::JobProgress {
                outcomes: vec![
                    ProgressOutcome { decrement: 2, probability: 0.8 },
                    ProgressOutcome { decrement: 1, probability: 0.1 },
                    ProgressOutcome { decrement: 0, probability: 0.1 },
                ],
            },
            cost: CostRule::JobProgress { scale: 2.0 },
            loss_schedule: LossScheduleRule::TwoFunctionDrift {
                f1: loss(&[3, 4, 5, 6], 0.55),
                f2: loss(&[4, 5, 6], 0.6),
            },
            budget: 5.6,
            initial_state: 9,
        }
    }

    pub fn kernel(&self) -> Result<Table3Kernel> {
        let (hn, ns, na) = (self.horizon, self.states, self.actions);
        match &self.transition {
            TransitionRule::Tabular { kernel } => Ok(kernel.clone()),
            TransitionRule::JobProgress { outcomes } => {
                if na != 2 {
                    return Err(Error::InvalidSpec("job-progress transitions need exactly 2 actions".into()));
                }
                let step: Vec<Vec<Vec<f64>>> = (0..ns)
                    .map(|s| {
                        let mut idle = vec![0.0; ns];
                        idle[s] = 1.0;
                        let mut process = vec![0.0; ns];
                        for o in outcomes {
                            process[s.saturating_sub(o.decrement)] += o.probability;
                        }
                        vec![idle, process]
                    })
                    .collect();
                Ok(vec![step; hn])
            }
        }
    }

    pub fn build<T: Real>(&self, episodes: usize) -> Result<LinearCmdpSpec<T>> {
        let kernel = self.kernel()?;
        check_shape3(&kernel, self.horizon, self.states, self.actions, "kernel")?;
        let (mean, cost_model) = match &self.cost {
            CostRule::JobProgress { scale } => {
                if *scale <= 0.0 {
                    return Err(Error::InvalidSpec("progress cost scale must be positive".into()));
                }
                let mean = kernel
                    .iter()
                    .map(|step| {
                        step.iter()
                            .enumerate()
                            .map(|(s, row)| {
                                row.iter()
                                    .map(|probs| {
                                        probs
                                            .iter()
                                            .enumerate()
                                            .map(|(sp, &p)| p * (1.0 - (s as f64 - sp as f64) / scale))
                                            .sum::<f64>()
                                    })
                                    .collect()
                            })
                            .collect()
                    })
                    .collect::<Table3>();
                (mean, CostModel::Progress { scale: T::lit(*scale) })
            }
            CostRule::Bernoulli { mean } => {
                check_shape3(mean, self.horizon, self.states, self.actions, "cost mean")?;
                (mean.clone(), CostModel::Bernoulli)
            }
        };
        let loss = |t: &Table3, name| -> Result<Vec<Vec<T>>> {
            check_shape3(t, self.horizon, self.states, self.actions, name)?;
            Ok(tabular_loss(&cast3::<T>(t)))
        };
        let variant = match &self.loss_schedule {
            LossScheduleRule::Fixed { loss: l } => LossVariant::Fixed(loss(l, "loss")?),
            LossScheduleRule::TwoFunctionDrift { f1, f2 } => LossVariant::TwoFunctionDrift {
                f1: loss(f1, "f1")?,
                f2: loss(f2, "f2")?,
            },
        };
        let kernel_t: Vec<Vec<Vec<Vec<T>>>> = kernel.iter().map(|step| cast3(step)).collect();
        LinearCmdpSpec::tabular(
            &kernel_t,
            &cast3(&mean),
            cost_model,
            LossSchedule::new(variant, episodes),
            T::lit(self.budget),
            self.initial_state,
        )
    }
}

fn cast3<T: Real>(t: &[Vec<Vec<f64>>]) -> Vec<Vec<Vec<T>>> {
    t.iter()
        .map(|a| a.iter().map(|b| b.iter().map(|&x| T::lit(x)).collect()).collect())
        .collect()
}

fn check_shape3<X>(t: &[Vec<Vec<X>>], h: usize, s: usize, a: usize, name: &str) -> Result<()> {
    let ok = t.len() == h && t.iter().all(|step| step.len() == s && step.iter().all(|row| row.len() == a));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("{name} table must have shape [{h}][{s}][{a}]")))
    }
}

/// Job-scheduling preset for a run of `episodes` episodes.
pub fn job_scheduling_v1<T: Real>(episodes: usize) -> LinearCmdpSpec<T> {
    InlineEnv::job_scheduling_v1()
        .build(episodes)
        .expect("built-in preset is valid")
}
