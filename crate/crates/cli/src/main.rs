//! `semipit` — experiment harness for the ring/wristband inductive link
//! simulator.

use anyhow::{anyhow, Result};
use clap::{Parser, Subcommand};
use semipit_cli::scenario::{Scenario, SweepAxis};
use semipit_cli::{
    emit_pipeline, emit_power_report, emit_snr_sweep, run_pipeline, run_power_report,
    run_snr_sweep, OutputFormat,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "semipit",
    about = "Simulator and experiment harness for a semi-passive inductive telemetry mouse link",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Scenario config (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Override the scenario's RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for tables and plots.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Table format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the SNR statistic over distance, bend angle or drive power.
    SnrSweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Sweep axis; defaults to the scenario's `[snr_sweep] axis`.
        #[arg(long, value_enum)]
        axis: Option<SweepAxis>,
    },
    /// Replay an input script through encode → channel → readout → decode.
    Pipeline {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Emit the component power table and battery-lifespan matrix.
    PowerReport {
        /// Optional scenario providing `[power_report]` capacities/duties.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
    /// Check a scenario file and report every violation.
    ValidateConfig {
        #[arg(long)]
        scenario: PathBuf,
    },
}

fn load_scenario(path: &Path, seed_override: Option<u64>) -> Result<Scenario> {
    let mut scenario = Scenario::load(path)?;
    if let Some(seed) = seed_override {
        scenario.seed = seed;
    }
    let violations = scenario.validate();
    if !violations.is_empty() {
        return Err(anyhow!(
            "scenario {} is invalid:\n  {}",
            path.display(),
            violations.join("\n  ")
        ));
    }
    Ok(scenario)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SnrSweep { common, axis } => {
            let scenario = load_scenario(&common.scenario, common.seed)?;
            let axis = axis.unwrap_or(scenario.snr_sweep.axis);
            let table = run_snr_sweep(&scenario, axis)?;
            for path in emit_snr_sweep(&table, &common.out, common.format)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Pipeline { common } => {
            let scenario = load_scenario(&common.scenario, common.seed)?;
            let report = run_pipeline(&scenario)?;
            for path in emit_pipeline(&report, &common.out)? {
                println!("wrote {}", path.display());
            }
            println!("{}", report.summary());
        }
        Command::PowerReport {
            scenario,
            out,
            format,
        } => {
            let spec = match scenario {
                Some(path) => Scenario::load(&path)?.power_report,
                None => Default::default(),
            };
            let report = run_power_report(&spec.capacities_mah, &spec.duties_hours_per_day)?;
            for path in emit_power_report(&report, &out, format)? {
                println!("wrote {}", path.display());
            }
        }
        Command::ValidateConfig { scenario } => {
            let loaded = Scenario::load(&scenario)?;
            let violations = loaded.validate();
            if !violations.is_empty() {
                return Err(anyhow!(
                    "scenario {} is invalid:\n  {}",
                    scenario.display(),
                    violations.join("\n  ")
                ));
            }
            println!("{} is valid", scenario.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
