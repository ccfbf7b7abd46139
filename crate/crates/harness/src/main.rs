use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use lincmdp_harness::{emit_plot_script, run_experiment, validate_config, ExperimentConfig, HarnessError};

#[derive(Parser)]
#[command(version, about = "Primal-dual learner for adversarial linear CMDPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every seed of an experiment and write CSVs.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config's `out`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (overrides the config's `parallel`).
        #[arg(long)]
        parallel: Option<usize>,
    },
    /// Print the effective parameters and check feasibility.
    Validate { config: PathBuf },
    /// Write plot.py next to an aggregate CSV.
    Plot { aggregate: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<HarnessError>().map_or(1, HarnessError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}

fn execute(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Run { config, out, parallel } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(p) = parallel {
                cfg.parallel = p;
            }
            let out = out
                .or_else(|| cfg.out.clone())
                .context("no output directory: pass --out or set `out` in the config")
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            validate_config(&cfg)?;
            let report = run_experiment(&cfg, &out)?;
            for s in &report.summary.seeds {
                println!(
                    "seed {:>4}  regret {:>12.3}  slope {:>6.3}  violation {:>10.3}  epochs {}",
                    s.seed,
                    s.final_regret.unwrap_or(f64::NAN),
                    s.regret_slope.unwrap_or(f64::NAN),
                    s.final_violation,
                    s.epochs
                );
            }
            println!("wrote {}", report.aggregate_csv.display());
            let failures = &report.summary.failures;
            if !failures.is_empty() {
                return Err(HarnessError::SeedsFailed {
                    failed: failures.len(),
                    total: cfg.seeds.len(),
                    code: failures.iter().map(|f| f.exit_code).max().unwrap_or(2),
                }
                .into());
            }
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            print!("{}", validate_config(&cfg)?);
        }
        Command::Plot { aggregate } => {
            let script = aggregate.with_file_name("plot.py");
            emit_plot_script(&aggregate, &script)?;
            println!("{}", script.display());
        }
    }
    Ok(())
}
