//! Exact ground truth on tabular environments: policy evaluation by backward
//! recursion, the constrained optimum by Lagrangian bisection, and the Slater
//! margin.

use log::warn;

use crate::envmodel::LinearCmdpSpec;
use crate::error::{Error, Result};
use crate::learner::PolicyTable;
use crate::scalar::{dot, Real};

/// V_h(s) for h in 0..=H, with V_H ≡ 0.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueTable<T> {
    values: Vec<Vec<T>>,
}

impl<T: Real> ValueTable<T> {
    pub fn get(&self, h: usize, s: usize) -> T {
        self.values[h][s]
    }

    pub fn step(&self, h: usize) -> &[T] {
        &self.values[h]
    }
}

/// Exact V^π for per-step reward `reward(h, s, a)`.
pub fn dp_policy_value<T: Real>(
    spec: &LinearCmdpSpec<T>,
    policy: &[Vec<Vec<T>>],
    reward: impl Fn(usize, usize, usize) -> T,
) -> ValueTable<T> {
    let (horizon, ns, na) = (spec.horizon(), spec.num_states(), spec.num_actions());
    let mut values = vec![vec![T::zero(); ns]; horizon + 1];
    for h in (0..horizon).rev() {
        for s in 0..ns {
            let mut v = T::zero();
            for a in 0..na {
                let p = policy[h][s][a];
                if p == T::zero() {
                    continue;
                }
                let q = reward(h, s, a) + dot(spec.transition_probs(h, s, a), &values[h + 1]);
                v = v + p * q;
            }
            values[h][s] = v;
        }
    }
    ValueTable { values }
}

/// Deterministic minimizer of the cumulative reward. Ties go to the lowest
/// action index.
pub fn dp_minimize<T: Real>(
    spec: &LinearCmdpSpec<T>,
    reward: impl Fn(usize, usize, usize) -> T,
) -> (ValueTable<T>, Vec<Vec<usize>>) {
    let (horizon, ns, na) = (spec.horizon(), spec.num_states(), spec.num_actions());
    let mut values = vec![vec![T::zero(); ns]; horizon + 1];
    let mut actions = vec![vec![0; ns]; horizon];
    for h in (0..horizon).rev() {
        for s in 0..ns {
            let mut best = T::infinity();
            for a in 0..na {
                let q = reward(h, s, a) + dot(spec.transition_probs(h, s, a), &values[h + 1]);
                if q < best {
                    best = q;
                    actions[h][s] = a;
                }
            }
            values[h][s] = best;
        }
    }
    (ValueTable { values }, actions)
}

pub fn deterministic_policy<T: Real>(actions: &[Vec<usize>], num_actions: usize) -> PolicyTable<T> {
    actions
        .iter()
        .map(|step| {
            step.iter()
                .map(|&a| (0..num_actions).map(|b| if a == b { T::one() } else { T::zero() }).collect())
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstrainedOptimum<T> {
    /// V* = min_π V_f̄^π(s₁) subject to V_g^π(s₁) ≤ b.
    pub value: T,
    pub lambda_star: T,
    /// γ = b − min_π V_g^π(s₁).
    pub slater_gamma: T,
}

/// (V_f, V_g) at s₁ of the deterministic minimizer of f̄ + λg.
fn lagrangian_point<T: Real>(spec: &LinearCmdpSpec<T>, avg_loss: &[Vec<T>], lambda: T) -> (T, T) {
    let f = |h: usize, s: usize, a: usize| spec.loss_value(avg_loss, h, s, a);
    let g = |h: usize, s: usize, a: usize| spec.mean_cost(h, s, a);
    let (_, actions) = dp_minimize(spec, |h, s, a| f(h, s, a) + lambda * g(h, s, a));
    let pi = deterministic_policy::<T>(&actions, spec.num_actions());
    let s1 = spec.initial_state();
    (dp_policy_value(spec, &pi, f).get(0, s1), dp_policy_value(spec, &pi, g).get(0, s1))
}

/// d(λ) = min_π V_{f̄+λg}^π(s₁) − λb.
pub fn dual_function<T: Real>(spec: &LinearCmdpSpec<T>, avg_loss: &[Vec<T>], budget: T, lambda: T) -> T {
    let (vf, vg) = lagrangian_point(spec, avg_loss, lambda);
    vf + lambda * vg - lambda * budget
}

pub fn slater_margin<T: Real>(spec: &LinearCmdpSpec<T>, budget: T) -> T {
    let (values, _) = dp_minimize(spec, |h, s, a| spec.mean_cost(h, s, a));
    budget - values.get(0, spec.initial_state())
}

/// Solves the single-constraint CMDP by bisection on the dual variable.
///
/// The bracket [lo, hi] is shrunk to width 1e-6 keeping V_g(π_lo) > b ≥
/// V_g(π_hi); both endpoint policies then minimize the Lagrangian at λ*, and
/// the mixture of the two that meets the budget exactly is the primal optimum.
pub fn constrained_optimum<T: Real>(
    spec: &LinearCmdpSpec<T>,
    avg_loss: &[Vec<T>],
    budget: T,
) -> Result<ConstrainedOptimum<T>> {
    let gamma = slater_margin(spec, budget);
    let tol = T::identity_tol();
    if gamma < -tol {
        return Err(Error::Infeasible {
            min_cost: (budget - gamma).as_f64(),
            budget: budget.as_f64(),
        });
    }
    if gamma <= T::zero() {
        warn!("Slater margin {gamma} is not positive");
    }

    let (vf0, vg0) = lagrangian_point(spec, avg_loss, T::zero());
    if vg0 <= budget + tol {
        return Ok(ConstrainedOptimum {
            value: vf0,
            lambda_star: T::zero(),
            slater_gamma: gamma,
        });
    }

    let horizon = T::lit(spec.horizon() as f64);
    let mut hi = T::lit(2.0) * horizon / gamma.max(T::lit(1e-9));
    let mut hi_point = lagrangian_point(spec, avg_loss, hi);
    let mut doublings = 0;
    while hi_point.1 > budget + tol {
        hi = hi * T::lit(2.0);
        hi_point = lagrangian_point(spec, avg_loss, hi);
        doublings += 1;
        if doublings > 200 {
            return Err(Error::Consistency("dual bracket did not close".into()));
        }
    }
    let mut lo = T::zero();
    let mut lo_point = (vf0, vg0);
    let width = T::lit(1e-6);
    while hi - lo > width {
        let mid = (lo + hi) / T::lit(2.0);
        let p = lagrangian_point(spec, avg_loss, mid);
        if p.1 > budget + tol {
            lo = mid;
            lo_point = p;
        } else {
            hi = mid;
            hi_point = p;
        }
    }
    let ((vf_lo, vg_lo), (vf_hi, vg_hi)) = (lo_point, hi_point);
    let value = if vg_lo - vg_hi > tol {
        let w = (budget - vg_hi) / (vg_lo - vg_hi);
        w * vf_lo + (T::one() - w) * vf_hi
    } else {
        vf_hi
    };
    Ok(ConstrainedOptimum {
        value,
        lambda_star: (lo + hi) / T::lit(2.0),
        slater_gamma: gamma,
    })
}
