//! Multi-seed experiment runner for the `lincmdp` learner: config parsing,
//! parallel seed execution, aggregation with confidence bands, CSV output
//! and plotting-script generation.

pub mod config;
pub mod error;
pub mod plot;
pub mod run;
pub mod validate;

pub use config::{ExperimentConfig, HyperConfig, HyperPreset, Precision};
pub use error::HarnessError;
pub use plot::emit_plot_script;
pub use run::{aggregate, run_experiment, run_seed, run_seeds, ExperimentReport, SeedOutcome, SeedSummary};
pub use validate::{validate_config, ValidationReport};
