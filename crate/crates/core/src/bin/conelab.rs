use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use conelab::scenario::{self, Experiment, EXIT_CONFIG};

/// Light-cone locality experiments driven by scenario files.
#[derive(Parser)]
#[command(name = "conelab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write report.json plus data files.
    Run {
        config: PathBuf,
        /// Replace the scenario's seed list with this single seed.
        #[arg(long)]
        seed_override: Option<u64>,
        /// Write outputs here instead of the configured directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Check a scenario file and list every problem found.
    Validate { config: PathBuf },
    /// Print the available experiments.
    ListExperiments,
}

fn load(path: &PathBuf) -> Result<scenario::ScenarioConfig, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        ExitCode::from(EXIT_CONFIG as u8)
    })?;
    scenario::parse_config(&text).map_err(|issues| {
        for i in &issues {
            eprintln!("{}: {i}", path.display());
        }
        ExitCode::from(EXIT_CONFIG as u8)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("CONELAB_THREADS").ok().and_then(|v| v.parse().ok()) {
        // only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::ListExperiments => {
            for e in Experiment::ALL {
                println!("{:<18} {}", e.name(), e.summary());
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match load(&config) {
            Ok(cfg) => {
                println!("{}: ok ({})", config.display(), cfg.experiment);
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::Run { config, seed_override, out_dir } => {
            let mut cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            if let Some(seed) = seed_override {
                cfg.override_seed(seed);
            }
            match scenario::run(&cfg, out_dir.as_deref()) {
                Ok(report) => {
                    print!("{}", report.summary());
                    ExitCode::from(report.exit_code() as u8)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(3)
                }
            }
        }
    }
}
