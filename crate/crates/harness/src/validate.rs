use std::fmt;

use lincmdp::slater_margin;

use crate::config::ExperimentConfig;
use crate::error::HarnessError;

pub const THEORY_REGIME_WARNING: &str = "theory regime H² ≤ K not met";

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    /// (symbol, value) after presets and overrides.
    pub parameters: Vec<(&'static str, String)>,
    pub theory_regime: bool,
    pub slater_gamma: f64,
    pub warnings: Vec<String>,
}

/// Checks the hyperparameters and the Slater condition without running.
pub fn validate_config(cfg: &ExperimentConfig) -> Result<ValidationReport, HarnessError> {
    cfg.check()?;
    let spec = cfg.build_spec::<f64>()?;
    let hp = cfg.hyper_params(&spec)?;
    let gamma = slater_margin(&spec, spec.budget());
    if gamma < 0.0 {
        return Err(lincmdp::Error::Infeasible {
            min_cost: spec.budget() - gamma,
            budget: spec.budget(),
        }
        .into());
    }

    let mut warnings = Vec::new();
    let theory_regime = hp.theory_regime();
    if !theory_regime {
        warnings.push(format!("{THEORY_REGIME_WARNING} (H² = {}, K = {})", hp.horizon * hp.horizon, hp.episodes));
    }
    if gamma == 0.0 {
        warnings.push("Slater margin γ = 0: no strictly feasible policy".into());
    }
    if hp.mixing_period > hp.episodes {
        warnings.push(format!("mixing period {} exceeds K = {}", hp.mixing_period, hp.episodes));
    }

    let parameters = vec![
        ("K", hp.episodes.to_string()),
        ("H", hp.horizon.to_string()),
        ("d", spec.dim().to_string()),
        ("|S|", spec.num_states().to_string()),
        ("|A|", spec.num_actions().to_string()),
        ("b", spec.budget().to_string()),
        ("δ", hp.delta.to_string()),
        ("α", hp.alpha.to_string()),
        ("η", hp.eta.to_string()),
        ("θ", hp.theta.to_string()),
        ("β_b", hp.beta_b.to_string()),
        ("β_w", hp.beta_w.to_string()),
        ("mixing period", hp.mixing_period.to_string()),
        ("4αηH³", hp.dual_shrinkage().to_string()),
        ("δ_max", hp.dual_step_bound().to_string()),
        ("11ηH³K", hp.dual_soft_bound().to_string()),
        ("epoch bound", hp.epoch_bound(spec.dim()).to_string()),
        ("γ", gamma.to_string()),
    ];
    Ok(ValidationReport {
        parameters,
        theory_regime,
        slater_gamma: gamma,
        warnings,
    })
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.parameters.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
        for (name, value) in &self.parameters {
            let pad = width - name.chars().count();
            writeln!(f, "{name}{}  {value}", " ".repeat(pad))?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lincmdp::envmodel::{EnvConfig, InlineEnv};

    #[test]
    fn fig1_preset_is_valid() {
        let report = validate_config(&ExperimentConfig::paper_fig1()).unwrap();
        assert!(report.slater_gamma > 0.0);
        assert!(report.theory_regime);
        assert!(report.warnings.is_empty());
        assert!(report.to_string().contains("β_b"));
    }

    #[test]
    fn short_run_warns() {
        let mut cfg = ExperimentConfig::paper_fig1();
        cfg.episodes = 50;
        let report = validate_config(&cfg).unwrap();
        assert!(!report.theory_regime);
        assert!(report.warnings[0].starts_with(THEORY_REGIME_WARNING));
    }

    #[test]
    fn low_budget_is_infeasible() {
        let mut env = InlineEnv::job_scheduling_v1();
        env.budget = 5.0;
        let mut cfg = ExperimentConfig::paper_fig1();
        cfg.environment = EnvConfig::Inline(env);
        let err = validate_config(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }
}
