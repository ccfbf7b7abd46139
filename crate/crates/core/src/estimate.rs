//! Least-squares estimation, feature contraction, and optimistic Q/V estimates.

use std::collections::BTreeMap;

use crate::envmodel::FeatureMap;
use crate::error::{Error, Result};
use crate::linalg::{AnchorSnapshot, DesignMatrix};
use crate::scalar::{axpy, dot, Real};

/// Learner hyperparameters.
///
/// `alpha` is the mirror-descent step, `eta` the dual step, `theta` the mixing
/// weight, `beta_b` the bonus coefficient and `beta_w` the contraction slope.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperParams<T> {
    pub episodes: usize,
    pub horizon: usize,
    pub delta: T,
    pub alpha: T,
    pub eta: T,
    pub theta: T,
    pub beta_b: T,
    pub beta_w: T,
    pub mixing_period: usize,
}

/// ⌊K^{3/4}⌋, at least 1.
pub fn default_mixing_period(episodes: usize) -> usize {
    let p = (episodes as f64).powf(0.75);
    ((p + 1e-9).floor() as usize).max(1)
}

impl<T: Real> HyperParams<T> {
    /// Default wiring with the confidence-derived bonus coefficient.
    pub fn theory(episodes: usize, horizon: usize, dim: usize, num_actions: usize, delta: T) -> Self {
        let k = T::lit(episodes as f64);
        let h = T::lit(horizon as f64);
        let d = T::lit(dim as f64);
        let a = T::lit(num_actions as f64);
        let two = T::lit(2.0);
        let beta_b = two * (two * d * (T::lit(6.0) * k * h / delta).ln()).sqrt()
            + T::lit(50.0)
                * (k.powf(T::lit(0.25)) + T::one())
                * d
                * h
                * (T::lit(5.0) * h * h * k * k * a / delta).ln().sqrt();
        let beta_w = (T::lit(4.0) * beta_b * k.ln()).max(T::one());
        Self::base(episodes, horizon, delta, beta_b, beta_w)
    }

    /// Experiment tuning: α = 0.1, β_b = K^{1/4}, β_w = β_b ln K; the rest
    /// as in [`HyperParams::theory`].
    pub fn tuned(episodes: usize, horizon: usize, delta: T) -> Self {
        let k = T::lit(episodes as f64);
        let beta_b = k.powf(T::lit(0.25));
        let beta_w = (beta_b * k.ln()).max(T::one());
        Self {
            alpha: T::lit(0.1),
            ..Self::base(episodes, horizon, delta, beta_b, beta_w)
        }
    }

    fn base(episodes: usize, horizon: usize, delta: T, beta_b: T, beta_w: T) -> Self {
        let k = T::lit(episodes as f64);
        let h = T::lit(horizon as f64);
        let k34 = k.powf(T::lit(-0.75));
        Self {
            episodes,
            horizon,
            delta,
            alpha: k34 / h,
            eta: k34 / (h * h),
            // θ must lie in (0,1); a single-episode run uses θ = 1/2.
            theta: T::one() / T::lit(episodes.max(2) as f64),
            beta_b,
            beta_w,
            mixing_period: default_mixing_period(episodes),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidHyper(m));
        if self.episodes == 0 {
            return bad("K must be at least 1".into());
        }
        if self.horizon == 0 {
            return bad("H must be at least 1".into());
        }
        if !(self.theta > T::zero() && self.theta < T::one()) {
            return bad(format!("theta = {} not in (0,1)", self.theta));
        }
        if !(self.alpha > T::zero()) || !(self.eta > T::zero()) {
            return bad("alpha and eta must be positive".into());
        }
        if !(self.beta_w >= T::one()) {
            return bad(format!("beta_w = {} below 1", self.beta_w));
        }
        if !(self.beta_b >= T::zero()) {
            return bad(format!("beta_b = {} negative", self.beta_b));
        }
        if !(self.delta > T::zero() && self.delta < T::one()) {
            return bad(format!("delta = {} not in (0,1)", self.delta));
        }
        if self.mixing_period == 0 {
            return bad("mixing period must be at least 1".into());
        }
        // The step-size condition is a consequence of H² ≤ K under default
        // wiring; outside that regime (K < 2 in particular) the run proceeds.
        if self.dual_shrinkage() > T::one() {
            if self.theory_regime() {
                return bad(format!("4·alpha·eta·H³ = {} exceeds 1", self.dual_shrinkage()));
            }
            log::warn!("4·alpha·eta·H³ = {} exceeds 1 outside the theory regime", self.dual_shrinkage());
        }
        Ok(())
    }

    /// H² ≤ K.
    pub fn theory_regime(&self) -> bool {
        self.horizon * self.horizon <= self.episodes
    }

    fn h(&self) -> T {
        T::lit(self.horizon as f64)
    }

    fn k(&self) -> T {
        T::lit(self.episodes as f64)
    }

    /// 4αηH³.
    pub fn dual_shrinkage(&self) -> T {
        T::lit(4.0) * self.alpha * self.eta * self.h().powi(3)
    }

    /// Maximum per-episode dual change: 44η²αH⁶K + 3ηH + 4ηαH³ + 4ηθH².
    pub fn dual_step_bound(&self) -> T {
        let (h, k) = (self.h(), self.k());
        T::lit(44.0) * self.eta * self.eta * self.alpha * h.powi(6) * k
            + T::lit(3.0) * self.eta * h
            + T::lit(4.0) * self.eta * self.alpha * h.powi(3)
            + T::lit(4.0) * self.eta * self.theta * h * h
    }

    /// 11ηH³K.
    pub fn dual_soft_bound(&self) -> T {
        T::lit(11.0) * self.eta * self.h().powi(3) * self.k()
    }

    /// (3/2)·d·H·ln(2K).
    pub fn epoch_bound(&self, dim: usize) -> T {
        T::lit(1.5) * T::lit(dim as f64) * self.h() * (T::lit(2.0) * self.k()).ln()
    }

    /// 2(H − h) for 0-based step h.
    pub fn q_bound(&self, h: usize) -> T {
        T::lit(2.0 * (self.horizon - h) as f64)
    }
}

/// σ(−β_w ν + ln K) = 1 / (1 + exp(β_w ν − ln K)).
pub fn contraction_factor<T: Real>(nu: T, beta_w: T, episodes: usize) -> T {
    let z = beta_w * nu - T::lit(episodes as f64).ln();
    T::one() / (T::one() + z.exp())
}

/// Per-step regression right-hand sides, aggregated by next state.
#[derive(Clone, Debug)]
pub struct RegressionAccumulator<T> {
    steps: Vec<StepAccumulator<T>>,
}

#[derive(Clone, Debug)]
pub struct StepAccumulator<T> {
    /// Σ_τ φ(s_h^τ, a_h^τ) g_h^τ.
    pub cost_rhs: Vec<T>,
    /// next state s' ↦ Σ_{τ: s_{h+1}^τ = s'} φ(s_h^τ, a_h^τ).
    pub next_state_features: BTreeMap<usize, Vec<T>>,
    /// Σ_τ φ(s_h^τ, a_h^τ).
    pub feature_sum: Vec<T>,
    pub samples: usize,
}

impl<T: Real> RegressionAccumulator<T> {
    pub fn new(horizon: usize, dim: usize) -> Self {
        let step = StepAccumulator {
            cost_rhs: vec![T::zero(); dim],
            next_state_features: BTreeMap::new(),
            feature_sum: vec![T::zero(); dim],
            samples: 0,
        };
        Self {
            steps: vec![step; horizon],
        }
    }

    pub fn record(&mut self, h: usize, phi: &[T], cost: T, next_state: usize) {
        let step = &mut self.steps[h];
        axpy(&mut step.cost_rhs, cost, phi);
        axpy(&mut step.feature_sum, T::one(), phi);
        let agg = step
            .next_state_features
            .entry(next_state)
            .or_insert_with(|| vec![T::zero(); phi.len()]);
        axpy(agg, T::one(), phi);
        step.samples += 1;
    }

    pub fn step(&self, h: usize) -> &StepAccumulator<T> {
        &self.steps[h]
    }
}

/// θ̂_g = Λ⁻¹ Σ φ g.
pub fn cost_param_estimate<T: Real>(design: &DesignMatrix<T>, cost_rhs: &[T]) -> Vec<T> {
    design.solve(cost_rhs)
}

/// Full-information loss feedback: the observed parameters are the estimate.
pub fn loss_param_passthrough<T: Real>(observed: &[T]) -> Vec<T> {
    observed.to_vec()
}

/// ψ̂V = Λ⁻¹ Σ_{s'} (Σ_{τ: s'} φ) V(s'). Every aggregated next state must have a value.
pub fn value_regression<T: Real>(
    design: &DesignMatrix<T>,
    next_state_features: &BTreeMap<usize, Vec<T>>,
    value: impl Fn(usize) -> Option<T>,
) -> Result<Vec<T>> {
    let mut rhs = vec![T::zero(); design.dim()];
    for (&s, agg) in next_state_features {
        let v = value(s).ok_or_else(|| Error::Consistency(format!("no value estimate for next state {s}")))?;
        axpy(&mut rhs, v, agg);
    }
    Ok(design.solve(&rhs))
}

/// Contracted feature data for one (h, s, a) under the epoch anchor.
#[derive(Clone, Debug)]
pub struct ContractedFeature<T> {
    /// ν_e = ‖φ‖_{Λ_anchor⁻¹}.
    pub nu: T,
    /// σ_e = σ(−β_w ν_e + ln K).
    pub sigma: T,
    /// φ̄ = σ_e φ.
    pub phi_bar: Vec<T>,
    /// ν̄_e = ‖φ̄‖_{Λ_anchor⁻¹} = σ_e ν_e.
    pub nu_bar: T,
}

/// Contracted features for every (h, s, a), frozen at an epoch start.
#[derive(Clone, Debug)]
pub struct EpochFeatureCache<T> {
    anchors: Vec<AnchorSnapshot<T>>,
    entries: Vec<ContractedFeature<T>>,
    num_states: usize,
    num_actions: usize,
}

impl<T: Real> EpochFeatureCache<T> {
    pub fn build(
        features: &FeatureMap<T>,
        designs: &[DesignMatrix<T>],
        beta_w: T,
        episodes: usize,
    ) -> Result<Self> {
        let ns = features.num_states();
        let na = features.num_actions();
        let anchors: Vec<_> = designs.iter().map(DesignMatrix::snapshot).collect();
        let mut entries = Vec::with_capacity(designs.len() * ns * na);
        for anchor in &anchors {
            for s in 0..ns {
                for a in 0..na {
                    let phi = features.get(s, a);
                    let nu = anchor.mahalanobis(phi)?;
                    let sigma = contraction_factor(nu, beta_w, episodes);
                    entries.push(ContractedFeature {
                        nu,
                        sigma,
                        phi_bar: phi.iter().map(|&x| x * sigma).collect(),
                        nu_bar: sigma * nu,
                    });
                }
            }
        }
        Ok(Self {
            anchors,
            entries,
            num_states: ns,
            num_actions: na,
        })
    }

    pub fn anchor(&self, h: usize) -> &AnchorSnapshot<T> {
        &self.anchors[h]
    }

    pub fn anchor_logdet(&self, h: usize) -> T {
        self.anchors[h].logdet()
    }

    /// The |A| contracted features of state `s` at step `h`.
    #[inline]
    pub fn row(&self, h: usize, s: usize) -> &[ContractedFeature<T>] {
        let start = (h * self.num_states + s) * self.num_actions;
        &self.entries[start..start + self.num_actions]
    }

    pub fn get(&self, h: usize, s: usize, a: usize) -> &ContractedFeature<T> {
        &self.row(h, s)[a]
    }
}

/// Q̂(s,a) = φ̄ᵀw − β_b ν̄_e.
#[inline]
pub fn q_estimate<T: Real>(entry: &ContractedFeature<T>, w: &[T], beta_b: T) -> T {
    dot(&entry.phi_bar, w) - beta_b * entry.nu_bar
}

/// V̂(s) = Σ_a π(a|s) Q̂(s,a).
#[inline]
pub fn v_estimate<T: Real>(pi: &[T], q: &[T]) -> T {
    dot(pi, q)
}
