//! Per-episode ground-truth bookkeeping, cumulative regret and violation, and
//! CSV output.

use std::io::Write;

use serde::Serialize;

use crate::envmodel::LinearCmdpSpec;
use crate::error::{Error, Result};
use crate::learner::EpisodeRecord;
use crate::oracle::dp_policy_value;
use crate::scalar::Real;

pub const CSV_COLUMNS: [&str; 11] = [
    "k",
    "epoch",
    "Y",
    "v_f_hat",
    "v_g_hat",
    "v_f_true",
    "v_g_true",
    "cum_regret",
    "cum_violation",
    "mixed_flag",
    "reset_flag",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpisodeMetrics {
    pub k: usize,
    pub epoch: usize,
    pub dual: f64,
    pub v_f_hat: f64,
    pub v_g_hat: f64,
    pub v_f_true: f64,
    pub v_g_true: f64,
    pub mixed: bool,
    pub reset: bool,
}

#[derive(Clone, Debug)]
pub struct RunMetrics<T> {
    budget: T,
    initial_state: usize,
    rows: Vec<EpisodeMetrics>,
    loss_sum: Vec<Vec<T>>,
}

impl<T: Real> RunMetrics<T> {
    pub fn new(spec: &LinearCmdpSpec<T>) -> Self {
        Self {
            budget: spec.budget(),
            initial_state: spec.initial_state(),
            rows: Vec::new(),
            loss_sum: vec![vec![T::zero(); spec.dim()]; spec.horizon()],
        }
    }

    /// Records episode `record.k` played with `policy`, evaluating V_f for the
    /// realized loss and V_g exactly.
    pub fn record_episode(
        &mut self,
        spec: &LinearCmdpSpec<T>,
        policy: &[Vec<Vec<T>>],
        record: &EpisodeRecord<T>,
    ) -> Result<()> {
        let s1 = self.initial_state;
        let v_f = dp_policy_value(spec, policy, |h, s, a| spec.loss_value(&record.loss_params, h, s, a)).get(0, s1);
        let v_g = dp_policy_value(spec, policy, |h, s, a| spec.mean_cost(h, s, a)).get(0, s1);
        if !(v_f.is_finite() && v_g.is_finite()) {
            return Err(Error::NonFinite {
                episode: record.k,
                what: "true value",
            });
        }
        for (acc, theta) in self.loss_sum.iter_mut().zip(&record.loss_params) {
            for (a, t) in acc.iter_mut().zip(theta) {
                *a = *a + *t;
            }
        }
        self.rows.push(EpisodeMetrics {
            k: record.k,
            epoch: record.epoch_index,
            dual: record.dual.as_f64(),
            v_f_hat: record.v_f_hat.as_f64(),
            v_g_hat: record.v_g_hat.as_f64(),
            v_f_true: v_f.as_f64(),
            v_g_true: v_g.as_f64(),
            mixed: record.mixed,
            reset: record.reset,
        });
        Ok(())
    }

    pub fn rows(&self) -> &[EpisodeMetrics] {
        &self.rows
    }

    /// Loss parameters averaged over the recorded episodes.
    pub fn average_loss(&self) -> Vec<Vec<T>> {
        let n = T::lit(self.rows.len().max(1) as f64);
        self.loss_sum
            .iter()
            .map(|step| step.iter().map(|&x| x / n).collect())
            .collect()
    }

    /// Cumulative series and summary statistics. Regret columns need V*.
    pub fn finalize(&self, v_star: Option<f64>) -> RunSummary {
        let budget = self.budget.as_f64();
        let mut regret = v_star.map(|_| Vec::with_capacity(self.rows.len()));
        let mut violation = Vec::with_capacity(self.rows.len());
        let (mut r, mut v) = (0.0, 0.0);
        for row in &self.rows {
            if let (Some(series), Some(vs)) = (regret.as_mut(), v_star) {
                r += row.v_f_true - vs;
                series.push(r);
            }
            v += row.v_g_true - budget;
            violation.push(v.max(0.0));
        }
        let ks: Vec<f64> = self.rows.iter().map(|row| row.k as f64).collect();
        let regret_slope = regret.as_ref().and_then(|series| second_half_slope(&ks, series));
        let per_episode: Vec<f64> = self.rows.iter().map(|row| row.v_g_true - budget).collect();
        RunSummary {
            final_regret: regret.as_ref().and_then(|s| s.last().copied()),
            final_violation: violation.last().copied().unwrap_or(0.0),
            peak_violation: violation.iter().copied().fold(0.0, f64::max),
            regret_slope,
            window_violation: window_means(&per_episode, 10),
            max_dual: self.rows.iter().map(|row| row.dual).fold(0.0, f64::max),
            epochs: self.rows.last().map_or(0, |row| row.epoch),
            cum_regret: regret,
            cum_violation: violation,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub cum_regret: Option<Vec<f64>>,
    pub cum_violation: Vec<f64>,
    pub final_regret: Option<f64>,
    pub final_violation: f64,
    pub peak_violation: f64,
    /// Least-squares slope of ln Regret(k) on ln k over the second half.
    pub regret_slope: Option<f64>,
    /// Mean per-episode V_g − b in ten consecutive windows.
    pub window_violation: Vec<f64>,
    pub max_dual: f64,
    pub epochs: usize,
}

/// Slope of ln y on ln x over points with x ≥ x_max / 2 and y > 0.
pub fn second_half_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let x_max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x >= x_max / 2.0 && **y > 0.0 && **x > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    log_log_fit(&pts)
}

fn log_log_fit(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Means over `parts` nearly equal consecutive windows (fewer if short).
pub fn window_means(xs: &[f64], parts: usize) -> Vec<f64> {
    if xs.is_empty() {
        return Vec::new();
    }
    let parts = parts.min(xs.len());
    (0..parts)
        .map(|i| {
            let (lo, hi) = (i * xs.len() / parts, (i + 1) * xs.len() / parts);
            xs[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Writes one row per episode. `cum_regret` is omitted when the summary has no regret.
pub fn write_csv<W: Write>(rows: &[EpisodeMetrics], summary: &RunSummary, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    let with_regret = summary.cum_regret.is_some();
    let header: Vec<&str> = CSV_COLUMNS
        .iter()
        .copied()
        .filter(|c| with_regret || *c != "cum_regret")
        .collect();
    w.write_record(&header)?;
    for (i, row) in rows.iter().enumerate() {
        let mut rec = vec![
            row.k.to_string(),
            row.epoch.to_string(),
            fmt_float(row.dual),
            fmt_float(row.v_f_hat),
            fmt_float(row.v_g_hat),
            fmt_float(row.v_f_true),
            fmt_float(row.v_g_true),
        ];
        if let Some(regret) = &summary.cum_regret {
            rec.push(fmt_float(regret[i]));
        }
        rec.push(fmt_float(summary.cum_violation[i]));
        rec.push(u8::from(row.mixed).to_string());
        rec.push(u8::from(row.reset).to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest round-trip form; exponent notation at extreme magnitudes.
pub fn fmt_float(x: f64) -> String {
    format!("{x:?}")
}
