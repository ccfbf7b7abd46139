use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use lincmdp::learner::Monitors;
use lincmdp::metrics::{fmt_float, write_csv, EpisodeMetrics};
use lincmdp::{constrained_optimum, HyperParams, Learner, LinearCmdpSpec, Real, RunMetrics, RunStreams, RunSummary};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, Precision};
use crate::error::HarnessError;

/// z for a two-sided 95% normal interval.
const Z95: f64 = 1.96;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub v_star: f64,
    pub lambda_star: f64,
    pub slater_gamma: f64,
    pub final_regret: Option<f64>,
    pub final_violation: f64,
    pub peak_violation: f64,
    pub regret_slope: Option<f64>,
    pub window_violation: Vec<f64>,
    pub min_dual: f64,
    pub max_dual: f64,
    pub max_dual_step: f64,
    pub dual_step_bound: f64,
    pub dual_soft_bound: f64,
    pub dual_soft_violations: usize,
    pub q_bound_violations: usize,
    pub epochs: usize,
    pub epoch_bound: f64,
}

#[derive(Clone, Debug)]
pub struct SeedOutcome {
    pub rows: Vec<EpisodeMetrics>,
    pub series: RunSummary,
    pub summary: SeedSummary,
    pub elapsed_secs: f64,
}

/// Runs one learner for `cfg.episodes` episodes on `seed`.
pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<SeedOutcome, HarnessError> {
    match cfg.precision {
        Precision::F64 => run_typed::<f64>(cfg, seed),
        Precision::F32 => run_typed::<f32>(cfg, seed),
    }
}

fn run_typed<T: Real>(cfg: &ExperimentConfig, seed: u64) -> Result<SeedOutcome, HarnessError> {
    let start = Instant::now();
    let spec: LinearCmdpSpec<T> = cfg.build_spec()?;
    let hyper = cfg.hyper_params(&spec)?;
    let mut learner = Learner::new(&spec, hyper.clone())?;
    let mut streams = RunStreams::from_seed(seed);
    let mut metrics = RunMetrics::new(&spec);
    let mut min_dual = f64::INFINITY;
    for _ in 0..cfg.episodes {
        learner.start_episode(&spec)?;
        let policy = learner.deployed_policy()?;
        let record = learner.complete_episode(&spec, &mut streams)?;
        metrics.record_episode(&spec, &policy, &record)?;
        min_dual = min_dual.min(record.dual.as_f64());
    }
    let opt = constrained_optimum(&spec, &metrics.average_loss(), spec.budget())?;
    let series = metrics.finalize(Some(opt.value.as_f64()));
    let summary = summarize(seed, &hyper, spec.dim(), learner.monitors(), &series, min_dual, &opt);
    let elapsed_secs = start.elapsed().as_secs_f64();
    info!(
        "seed {seed}: {} episodes in {elapsed_secs:.1}s, regret {:?}, violation {}, {} epochs",
        cfg.episodes, summary.final_regret, summary.final_violation, summary.epochs
    );
    Ok(SeedOutcome {
        rows: metrics.rows().to_vec(),
        series,
        summary,
        elapsed_secs,
    })
}

fn summarize<T: Real>(
    seed: u64,
    hyper: &HyperParams<T>,
    dim: usize,
    monitors: &Monitors,
    series: &RunSummary,
    min_dual: f64,
    opt: &lincmdp::ConstrainedOptimum<T>,
) -> SeedSummary {
    SeedSummary {
        seed,
        v_star: opt.value.as_f64(),
        lambda_star: opt.lambda_star.as_f64(),
        slater_gamma: opt.slater_gamma.as_f64(),
        final_regret: series.final_regret,
        final_violation: series.final_violation,
        peak_violation: series.peak_violation,
        regret_slope: series.regret_slope,
        window_violation: series.window_violation.clone(),
        min_dual,
        max_dual: monitors.max_dual,
        max_dual_step: monitors.max_dual_step,
        dual_step_bound: hyper.dual_step_bound().as_f64(),
        dual_soft_bound: hyper.dual_soft_bound().as_f64(),
        dual_soft_violations: monitors.dual_soft_violations,
        q_bound_violations: monitors.q_bound_violations,
        epochs: series.epochs,
        epoch_bound: hyper.epoch_bound(dim).as_f64(),
    }
}

/// Runs every seed on a pool of `cfg.parallel` workers. Results come back
/// in seed order regardless of scheduling.
pub fn run_seeds(cfg: &ExperimentConfig) -> Result<Vec<(u64, Result<SeedOutcome, HarnessError>)>, HarnessError> {
    cfg.check()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallel)
        .build()
        .map_err(|e| HarnessError::Config(format!("worker pool: {e}")))?;
    Ok(pool.install(|| {
        cfg.seeds
            .par_iter()
            .map(|&seed| (seed, run_seed(cfg, seed)))
            .collect()
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AggregateRow {
    pub k: usize,
    pub count: usize,
    pub cum_regret_mean: f64,
    pub cum_regret_lo: f64,
    pub cum_regret_hi: f64,
    pub cum_violation_mean: f64,
    pub cum_violation_lo: f64,
    pub cum_violation_hi: f64,
}

/// Mean and half-width 1.96·s/√n (zero when n = 1).
pub fn mean_ci(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Z95 * var.sqrt() / n.sqrt())
}

/// Per-episode mean and 95% band across completed seeds.
pub fn aggregate(outcomes: &[&SeedOutcome]) -> Vec<AggregateRow> {
    let Some(first) = outcomes.first() else {
        return Vec::new();
    };
    let len = outcomes.iter().map(|o| o.rows.len()).min().unwrap_or(0);
    let mut regret = Vec::with_capacity(outcomes.len());
    let mut violation = Vec::with_capacity(outcomes.len());
    (0..len)
        .map(|i| {
            regret.clear();
            violation.clear();
            for o in outcomes {
                regret.push(o.series.cum_regret.as_ref().map_or(f64::NAN, |r| r[i]));
                violation.push(o.series.cum_violation[i]);
            }
            let (rm, rw) = mean_ci(&regret);
            let (vm, vw) = mean_ci(&violation);
            AggregateRow {
                k: first.rows[i].k,
                count: outcomes.len(),
                cum_regret_mean: rm,
                cum_regret_lo: rm - rw,
                cum_regret_hi: rm + rw,
                cum_violation_mean: vm,
                cum_violation_lo: vm - vw,
                cum_violation_hi: vm + vw,
            }
        })
        .collect()
}

pub fn write_aggregate(rows: &[AggregateRow], path: &Path) -> Result<(), HarnessError> {
    let csv_err = |source| HarnessError::Csv {
        path: path.to_owned(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record([
        "k",
        "count",
        "cum_regret_mean",
        "cum_regret_lo",
        "cum_regret_hi",
        "cum_violation_mean",
        "cum_violation_lo",
        "cum_violation_hi",
    ])
    .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            r.count.to_string(),
            fmt_float(r.cum_regret_mean),
            fmt_float(r.cum_regret_lo),
            fmt_float(r.cum_regret_hi),
            fmt_float(r.cum_violation_mean),
            fmt_float(r.cum_violation_lo),
            fmt_float(r.cum_violation_hi),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|source| HarnessError::Io {
        path: path.to_owned(),
        source,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SeedFailure {
    pub seed: u64,
    pub error: String,
    pub exit_code: i32,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    pub seeds: Vec<SeedSummary>,
    pub failures: Vec<SeedFailure>,
}

#[derive(Debug)]
pub struct ExperimentReport {
    pub summary: ExperimentSummary,
    pub seed_csvs: Vec<PathBuf>,
    pub aggregate_csv: PathBuf,
    pub plot_script: PathBuf,
}

pub fn seed_csv_path(out: &Path, seed: u64) -> PathBuf {
    out.join(format!("seed-{seed}.csv"))
}

/// Runs all seeds and writes per-seed CSVs, `aggregate.csv`, `summary.json`
/// and `plot.py` into `out`. Seeds that fail are listed in the summary and
/// left out of the aggregate.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<ExperimentReport, HarnessError> {
    let io_err = |path: &Path| {
        let path = path.to_owned();
        move |source| HarnessError::Io { path, source }
    };
    std::fs::create_dir_all(out).map_err(io_err(out))?;
    let results = run_seeds(cfg)?;

    let mut completed = Vec::new();
    let mut failures = Vec::new();
    let mut seed_csvs = Vec::new();
    for (seed, result) in &results {
        match result {
            Ok(outcome) => {
                let path = seed_csv_path(out, *seed);
                let file = File::create(&path).map_err(io_err(&path))?;
                write_csv(&outcome.rows, &outcome.series, BufWriter::new(file)).map_err(|source| {
                    HarnessError::Csv {
                        path: path.clone(),
                        source,
                    }
                })?;
                seed_csvs.push(path);
                completed.push(outcome);
            }
            Err(e) => {
                warn!("seed {seed} failed: {e}");
                failures.push(SeedFailure {
                    seed: *seed,
                    error: e.to_string(),
                    exit_code: e.exit_code(),
                });
            }
        }
    }

    let aggregate_csv = out.join("aggregate.csv");
    write_aggregate(&aggregate(&completed), &aggregate_csv)?;
    let plot_script = crate::plot::emit_plot_script(&aggregate_csv, &out.join("plot.py"))?;

    let summary = ExperimentSummary {
        config: cfg.clone(),
        seeds: completed.iter().map(|o| o.summary.clone()).collect(),
        failures,
    };
    let summary_path = out.join("summary.json");
    let json = serde_json::to_string_pretty(&summary).map_err(|e| HarnessError::Config(e.to_string()))?;
    std::fs::write(&summary_path, json + "\n").map_err(io_err(&summary_path))?;

    Ok(ExperimentReport {
        summary,
        seed_csvs,
        aggregate_csv,
        plot_script,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ci_of_known_sample() {
        let (m, w) = mean_ci(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        let s = (5.0f64 / 3.0).sqrt();
        assert!((w - 1.96 * s / 2.0).abs() < 1e-15);
        assert_eq!(mean_ci(&[7.0]), (7.0, 0.0));
    }

    #[test]
    fn single_seed_aggregate_is_the_run() {
        let mut cfg = ExperimentConfig::paper_fig1();
        cfg.episodes = 10;
        cfg.seeds = vec![4];
        let outcome = run_seed(&cfg, 4).unwrap();
        let agg = aggregate(&[&outcome]);
        assert_eq!(agg.len(), 10);
        for (row, reg) in agg.iter().zip(outcome.series.cum_regret.as_ref().unwrap()) {
            assert_eq!(row.count, 1);
            assert_eq!(row.cum_regret_mean, *reg);
            assert_eq!(row.cum_regret_lo, row.cum_regret_hi);
            assert_eq!(row.cum_violation_lo, row.cum_violation_hi);
        }
    }
}
