use lincmdp::envmodel::{tabular_loss, CostModel, LossSchedule, LossVariant};
use lincmdp::metrics::write_csv;
use lincmdp::{job_scheduling_v1, HyperParams, Learner, LinearCmdpSpec, Real, RunMetrics, RunStreams};

fn run_csv<T: Real>(spec: &LinearCmdpSpec<T>, k: usize, seed: u64) -> (Vec<u8>, Learner<T>, RunMetrics<T>) {
    let mut learner = Learner::new(spec, HyperParams::tuned(k, spec.horizon(), T::lit(0.05))).unwrap();
    let mut streams = RunStreams::from_seed(seed);
    let mut metrics = RunMetrics::new(spec);
    for _ in 0..k {
        learner.start_episode(spec).unwrap();
        let pi = learner.deployed_policy().unwrap();
        let rec = learner.complete_episode(spec, &mut streams).unwrap();
        metrics.record_episode(spec, &pi, &rec).unwrap();
    }
    let summary = metrics.finalize(Some(3.0));
    let mut buf = Vec::new();
    write_csv(metrics.rows(), &summary, &mut buf).unwrap();
    (buf, learner, metrics)
}

#[test]
fn identical_seeds_give_identical_csv() {
    let spec = job_scheduling_v1::<f64>(100);
    let (a, _, _) = run_csv(&spec, 100, 9);
    let (b, _, _) = run_csv(&spec, 100, 9);
    let (c, _, _) = run_csv(&spec, 100, 10);
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn single_episode_run() {
    let spec = job_scheduling_v1::<f64>(1);
    let mut learner = Learner::new(&spec, HyperParams::tuned(1, 10, 0.05)).unwrap();
    let records = learner.run(&spec, 1, &mut RunStreams::from_seed(1)).unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0].epoch_index, 1);
    assert!(records[0].reset && records[0].mixed);
    assert!(learner.dual().is_finite() && learner.dual() >= 0.0);
}

/// Two states, H = 3: action 0 is free but lossy, action 1 is cheap in loss
/// but costly; a budget of 1 binds under the uniform policy.
fn binding_instance(k: usize) -> LinearCmdpSpec<f64> {
    let kernel = vec![vec![vec![vec![0.7, 0.3], vec![0.4, 0.6]]; 2]; 3];
    let cost = vec![vec![vec![0.1, 0.9]; 2]; 3];
    let loss = tabular_loss(&vec![vec![vec![0.9, 0.1]; 2]; 3]);
    LinearCmdpSpec::tabular(
        &kernel,
        &cost,
        CostModel::Bernoulli,
        LossSchedule::new(LossVariant::Fixed(loss), k),
        1.0,
        0,
    )
    .unwrap()
}

#[test]
fn dual_resets_and_mixing_cadence() {
    let k = 3000;
    let spec = binding_instance(k);
    let mut hyper = HyperParams::tuned(k, 3, 0.05);
    // Small α and bonus so the optimistic cost estimate exceeds the budget.
    hyper.alpha = 1e-3;
    hyper.beta_b = 0.1;
    hyper.mixing_period = 37;
    let mut learner = Learner::new(&spec, hyper.clone()).unwrap();
    let records = learner.run(&spec, k, &mut RunStreams::from_seed(3)).unwrap();
    let mut epoch_start = 0;
    let mut moved = false;
    for r in &records {
        assert!(r.dual >= 0.0);
        if r.reset {
            epoch_start = r.k;
            assert_eq!(r.dual, 0.0);
        }
        moved |= r.dual > 0.0;
        assert_eq!(r.mixed, (r.k - epoch_start) % 37 == 0, "k = {}", r.k);
        assert_eq!(r.trajectory.len(), 3);
    }
    assert!(moved);
    assert!(learner.monitors().max_dual_step <= hyper.dual_step_bound());
    let epochs = records.last().unwrap().epoch_index as f64;
    assert!(epochs <= hyper.epoch_bound(spec.dim()));
}

#[test]
fn optimistic_cost_estimates() {
    // Q̂_g(s,a) ≤ φ̄ᵀ(θ_g + ψ V̂_{g,h+1}) on almost all sampled (k,h,s,a).
    let k = 4000;
    let spec = job_scheduling_v1::<f64>(k);
    let hyper = HyperParams::tuned(k, 10, 0.05);
    let beta_b = hyper.beta_b;
    let mut learner = Learner::new(&spec, hyper).unwrap();
    let mut streams = RunStreams::from_seed(21);
    let (mut checked, mut held) = (0usize, 0usize);
    for episode in 1..=k {
        learner.start_episode(&spec).unwrap();
        let sample = episode % 20 == 0;
        let (pi, cache) = if sample {
            (learner.deployed_policy().unwrap(), Some(learner.feature_cache().clone()))
        } else {
            (Vec::new(), None)
        };
        let rec = learner.complete_episode(&spec, &mut streams).unwrap();
        let Some(cache) = cache else { continue };
        let q = |h: usize, s: usize, a: usize| {
            let e = cache.get(h, s, a);
            e.phi_bar.iter().zip(&rec.w_g[h]).map(|(x, w)| x * w).sum::<f64>() - beta_b * e.nu_bar
        };
        for h in 0..spec.horizon() {
            let v_next: Vec<f64> = (0..spec.num_states())
                .map(|s| {
                    if h + 1 == spec.horizon() {
                        0.0
                    } else {
                        (0..spec.num_actions()).map(|a| pi[h + 1][s][a] * q(h + 1, s, a)).sum()
                    }
                })
                .collect();
            for s in 0..spec.num_states() {
                for a in 0..spec.num_actions() {
                    let sigma = cache.get(h, s, a).sigma;
                    let p = spec.transition_probs(h, s, a);
                    let target = sigma * (spec.mean_cost(h, s, a) + p.iter().zip(&v_next).map(|(p, v)| p * v).sum::<f64>());
                    checked += 1;
                    held += usize::from(q(h, s, a) <= target + 1e-12);
                }
            }
        }
    }
    let rate = held as f64 / checked as f64;
    assert!(rate >= 0.99, "optimism held on {rate:.4} of {checked}");
}

#[test]
fn single_precision_run() {
    let k = 2000;
    let spec32 = job_scheduling_v1::<f32>(k);
    let spec64 = job_scheduling_v1::<f64>(k);
    let (_, l32, m32) = run_csv(&spec32, k, 4);
    let (_, _, m64) = run_csv(&spec64, k, 4);
    assert_eq!(m32.rows().len(), k);
    for r in m32.rows() {
        assert!((0.0..=10.0).contains(&r.v_f_true) && (0.0..=10.0).contains(&r.v_g_true));
    }
    let mean = |rows: &[lincmdp::metrics::EpisodeMetrics]| rows.iter().map(|r| r.v_f_true).sum::<f64>() / k as f64;
    let (a, b) = (mean(m32.rows()), mean(m64.rows()));
    assert!((a - b).abs() < 0.05 * b, "f32 {a} f64 {b}");
    assert!(l32.dual() >= 0.0);
}

#[test]
fn rejects_mismatched_horizon() {
    let spec = job_scheduling_v1::<f64>(100);
    assert!(Learner::new(&spec, HyperParams::tuned(100, 5, 0.05)).is_err());
    let mut hp = HyperParams::tuned(100, 10, 0.05);
    hp.eta = 1.0;
    assert!(Learner::new(&spec, hp).is_err());
}
