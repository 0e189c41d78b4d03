use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crsense::experiments::{describe, load_config, run_scenario, ExperimentPreset, PresetId, ResultTable};
use crsense::Error;

/// Spectrum sensing with CSI-adaptive energy-detection thresholds.
#[derive(Parser)]
#[command(name = "crsense", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the scenario in a config file and write su/pu/miss rows.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `seed` from the file.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `replications` from the file.
        #[arg(long)]
        reps: Option<usize>,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one of the canned figure sweeps (fig2..fig6).
    Preset {
        #[arg(long)]
        figure: String,
        #[arg(long, default_value_t = 500)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and check a config file without simulating.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn emit(table: &ResultTable, out: Option<PathBuf>) -> crsense::Result<()> {
    match out {
        Some(path) => table.write_csv(&path),
        None => {
            print!("{}", table.to_csv());
            Ok(())
        }
    }
}

fn configure_workers() -> crsense::Result<()> {
    let Ok(raw) = std::env::var("CRSENSE_WORKERS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Validation(format!("CRSENSE_WORKERS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Validation(format!("cannot size worker pool: {e}")))
}

fn execute(cli: Cli) -> crsense::Result<()> {
    configure_workers()?;
    match cli.command {
        Command::Run { config, seed, reps, out } => {
            let mut cfg = load_config(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(r) = reps {
                cfg.replications = r;
            }
            cfg.validate()?;
            emit(&run_scenario(&cfg)?, out)
        }
        Command::Preset { figure, reps, seed, out } => {
            let id: PresetId = figure.parse()?;
            if reps < 1 {
                return Err(Error::Validation("replications must be >= 1".into()));
            }
            emit(&ExperimentPreset::new(id).with_run(reps, seed).run()?, out)
        }
        Command::Validate { config } => {
            let cfg = load_config(&config)?;
            println!("{}: ok\n{}", config.display(), describe(&cfg));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
