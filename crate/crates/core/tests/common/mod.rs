#![allow(dead_code)]

use lincmdp::envmodel::{tabular_loss, CostModel, LossSchedule, LossVariant};
use lincmdp::oracle::{deterministic_policy, dp_policy_value};
use lincmdp::{LinearCmdpSpec, PolicyTable};
use rand::Rng;

fn simplex<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Random tabular CMDP with a fixed loss and a budget strictly between the
/// minimum achievable cost and the cost of the unconstrained loss minimizer
/// when that gap exists.
pub fn random_tiny_cmdp<R: Rng>(rng: &mut R, ns: usize, na: usize, horizon: usize) -> (LinearCmdpSpec<f64>, Vec<Vec<f64>>) {
    let kernel: Vec<Vec<Vec<Vec<f64>>>> = (0..horizon)
        .map(|_| (0..ns).map(|_| (0..na).map(|_| simplex(rng, ns)).collect()).collect())
        .collect();
    let table = |rng: &mut R| -> Vec<Vec<Vec<f64>>> {
        (0..horizon)
            .map(|_| (0..ns).map(|_| (0..na).map(|_| rng.random_range(0.0..1.0)).collect()).collect())
            .collect()
    };
    let cost = table(rng);
    let loss = tabular_loss(&table(rng));
    let build = |budget: f64| {
        LinearCmdpSpec::tabular(
            &kernel,
            &cost,
            CostModel::Bernoulli,
            LossSchedule::new(LossVariant::Fixed(loss.clone()), 1),
            budget,
            0,
        )
        .unwrap()
    };
    let probe = build(horizon as f64);
    let values = all_deterministic_values(&probe, &loss);
    let min_g = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    let best_f = values.iter().copied().fold((f64::INFINITY, 0.0), |acc, v| if v.0 < acc.0 { v } else { acc });
    let budget = if best_f.1 > min_g {
        min_g + rng.random_range(0.2..0.8) * (best_f.1 - min_g)
    } else {
        min_g + 0.1
    };
    (build(budget.min(horizon as f64)), loss)
}

pub fn all_deterministic_policies(spec: &LinearCmdpSpec<f64>) -> Vec<PolicyTable<f64>> {
    let (h, ns, na) = (spec.horizon(), spec.num_states(), spec.num_actions());
    let slots = h * ns;
    let count = na.pow(slots as u32);
    (0..count)
        .map(|mut code| {
            let mut actions = vec![vec![0; ns]; h];
            for slot in 0..slots {
                actions[slot / ns][slot % ns] = code % na;
                code /= na;
            }
            deterministic_policy(&actions, na)
        })
        .collect()
}

/// (V_f, V_g) at s₁ for every deterministic policy.
pub fn all_deterministic_values(spec: &LinearCmdpSpec<f64>, loss: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let s1 = spec.initial_state();
    all_deterministic_policies(spec)
        .iter()
        .map(|pi| {
            let f = dp_policy_value(spec, pi, |h, s, a| spec.loss_value(loss, h, s, a)).get(0, s1);
            let g = dp_policy_value(spec, pi, |h, s, a| spec.mean_cost(h, s, a)).get(0, s1);
            (f, g)
        })
        .collect()
}

/// min over pairs of deterministic policies and mixing weights on a 1e-3
/// grid (plus each pair's exact budget-crossing weight) of the mixed loss
/// value subject to the mixed cost meeting the budget.
pub fn brute_force_optimum(values: &[(f64, f64)], budget: f64) -> f64 {
    let tol = 1e-12;
    let mut best = f64::INFINITY;
    for &(f1, g1) in values {
        if g1 <= budget + tol {
            best = best.min(f1);
        }
        for &(f2, g2) in values {
            for i in 0..=1000 {
                let w = i as f64 / 1000.0;
                if w * g1 + (1.0 - w) * g2 <= budget + tol {
                    best = best.min(w * f1 + (1.0 - w) * f2);
                }
            }
            if (g1 - budget) * (g2 - budget) < 0.0 {
                let w = (budget - g2) / (g1 - g2);
                best = best.min(w * f1 + (1.0 - w) * f2);
            }
        }
    }
    best
}

pub fn random_policy<R: Rng>(rng: &mut R, horizon: usize, ns: usize, na: usize) -> PolicyTable<f64> {
    (0..horizon)
        .map(|_| (0..ns).map(|_| simplex(rng, na)).collect())
        .collect()
}
