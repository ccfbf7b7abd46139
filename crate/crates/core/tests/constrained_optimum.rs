mod common;

use common::{all_deterministic_values, brute_force_optimum, random_tiny_cmdp};
use lincmdp::oracle::{dp_minimize, dual_function};
use lincmdp::{constrained_optimum, slater_margin};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn bisection_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..5 {
        let ns = rng.random_range(1..=3);
        let horizon = rng.random_range(1..=3);
        let (spec, loss) = random_tiny_cmdp(&mut rng, ns, 2, horizon);
        let values = all_deterministic_values(&spec, &loss);
        let brute = brute_force_optimum(&values, spec.budget());
        let opt = constrained_optimum(&spec, &loss, spec.budget()).unwrap();
        assert!((opt.value - brute).abs() <= 1e-4, "bisection {} brute {brute}", opt.value);
        let min_g = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        assert!((opt.slater_gamma - (spec.budget() - min_g)).abs() < 1e-12);
    }
}

#[test]
fn optimum_is_at_least_unconstrained_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let (spec, loss) = random_tiny_cmdp(&mut rng, 3, 2, 3);
        let opt = constrained_optimum(&spec, &loss, spec.budget()).unwrap();
        let (free, _) = dp_minimize(&spec, |h, s, a| spec.loss_value(&loss, h, s, a));
        assert!(opt.value >= free.get(0, 0) - 1e-12);
        assert!(opt.lambda_star >= 0.0);
        assert!(slater_margin(&spec, spec.budget()) > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dual_function_is_concave(seed in any::<u64>(), lo in 0.0f64..5.0, gap in 0.01f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (spec, loss) = random_tiny_cmdp(&mut rng, 3, 2, 3);
        let b = spec.budget();
        let (l0, l2) = (lo, lo + 2.0 * gap);
        let l1 = (l0 + l2) / 2.0;
        let mid = dual_function(&spec, &loss, b, l1);
        let chord = (dual_function(&spec, &loss, b, l0) + dual_function(&spec, &loss, b, l2)) / 2.0;
        prop_assert!(mid >= chord - 1e-12);
    }
}
