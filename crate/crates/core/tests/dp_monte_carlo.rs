mod common;

use common::{random_policy, random_tiny_cmdp};
use lincmdp::envmodel::{sample_categorical, LossVariant};
use lincmdp::{dp_policy_value, job_scheduling_v1, LinearCmdpSpec, PolicyTable};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Mean and standard error of the realized cumulative loss and sampled cost.
fn monte_carlo(
    spec: &LinearCmdpSpec<f64>,
    pi: &PolicyTable<f64>,
    loss: &[Vec<f64>],
    rollouts: usize,
    seed: u64,
) -> [(f64, f64); 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sums = [(0.0, 0.0); 2];
    for _ in 0..rollouts {
        let mut s = spec.initial_state();
        let (mut f, mut g) = (0.0, 0.0);
        for h in 0..spec.horizon() {
            let a = sample_categorical(&pi[h][s], &mut rng);
            let next = spec.sample_transition(h, s, a, &mut rng);
            f += spec.loss_value(loss, h, s, a);
            g += spec.sample_cost(h, s, a, next, &mut rng);
            s = next;
        }
        for (acc, x) in sums.iter_mut().zip([f, g]) {
            acc.0 += x;
            acc.1 += x * x;
        }
    }
    let n = rollouts as f64;
    sums.map(|(s, sq)| {
        let mean = s / n;
        let var = (sq / n - mean * mean) * n / (n - 1.0);
        (mean, (var / n).sqrt())
    })
}

fn check(spec: &LinearCmdpSpec<f64>, pi: &PolicyTable<f64>, loss: &[Vec<f64>], seed: u64) {
    let s1 = spec.initial_state();
    let exact = [
        dp_policy_value(spec, pi, |h, s, a| spec.loss_value(loss, h, s, a)).get(0, s1),
        dp_policy_value(spec, pi, |h, s, a| spec.mean_cost(h, s, a)).get(0, s1),
    ];
    let mc = monte_carlo(spec, pi, loss, 100_000, seed);
    for (v, (mean, se)) in exact.iter().zip(mc) {
        assert!((v - mean).abs() <= 3.0 * se.max(1e-12), "dp {v} mc {mean} ± {se}");
    }
}

#[test]
fn job_env_random_policies() {
    let spec = job_scheduling_v1::<f64>(1000);
    let LossVariant::TwoFunctionDrift { f1, .. } = spec.loss_schedule().variant() else {
        unreachable!()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..3 {
        let pi = random_policy(&mut rng, 10, 10, 2);
        check(&spec, &pi, f1, 100 + i);
    }
}

#[test]
fn tiny_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..3 {
        let (spec, loss) = random_tiny_cmdp(&mut rng, 3, 2, 3);
        let pi = random_policy(&mut rng, 3, 3, 2);
        check(&spec, &pi, &loss, 200 + i);
    }
}
