//! Command-line front end for the beamsim scenario engine.
//!
//! Exit codes: 0 success, 2 invalid config, 3 numerical failure,
//! 4 golden mismatch.

use beamsim::scenario::{
    builtin_scenario, diff_golden, list_scenarios, run_scenario, ScenarioConfig,
};
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Quantum-limited beam-displacement measurement simulator.
#[derive(Parser)]
#[command(name = "beamsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario and write traces plus a run manifest.
    Run {
        /// Built-in scenario name or path to a scenario TOML file.
        scenario: String,
        /// Override the scenario's RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: $BEAMSIM_OUT_DIR, else current dir).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Size of the rayon worker pool (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Override the mode-expansion order.
        #[arg(long)]
        max_order: Option<u32>,
    },
    /// List the built-in scenarios.
    List,
    /// Parse and validate a scenario TOML file without running it.
    Validate {
        /// Path to the scenario TOML file.
        file: PathBuf,
    },
    /// Compare a run manifest (and its trace files) against a golden directory.
    Diff {
        /// Path to the `.manifest` file produced by `run`.
        manifest: PathBuf,
        /// Directory holding the golden manifest and CSVs.
        golden_dir: PathBuf,
    },
}

fn load_scenario(name_or_path: &str) -> beamsim::Result<ScenarioConfig> {
    let path = Path::new(name_or_path);
    if path.is_file() || name_or_path.ends_with(".toml") {
        let text = std::fs::read_to_string(path)?;
        ScenarioConfig::from_toml(&text)
    } else {
        builtin_scenario(name_or_path)
    }
}

fn default_out_dir() -> PathBuf {
    std::env::var_os("BEAMSIM_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn run(cli: Cli) -> beamsim::Result<()> {
    match cli.command {
        Command::Run {
            scenario,
            seed,
            out_dir,
            threads,
            max_order,
        } => {
            if let Some(n) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| beamsim::Error::config("--threads", e.to_string()))?;
            }
            let mut config = load_scenario(&scenario)?;
            if let Some(s) = seed {
                config.seed = s;
            }
            if let Some(order) = max_order {
                config.expansion_order = order;
            }
            config.validate()?;
            let out_dir = out_dir.unwrap_or_else(default_out_dir);
            let manifest = run_scenario(&config, &out_dir)?;
            println!(
                "wrote {}",
                out_dir.join(format!("{}.manifest", manifest.scenario)).display()
            );
            for (name, file) in &manifest.outputs {
                println!("  {name}: {}", out_dir.join(file).display());
            }
            for (key, value) in &manifest.results {
                println!("  {key} = {value}");
            }
            Ok(())
        }
        Command::List => {
            for (name, description) in list_scenarios() {
                println!("{name:<18} {description}");
            }
            Ok(())
        }
        Command::Validate { file } => {
            let text = std::fs::read_to_string(&file)?;
            let config = ScenarioConfig::from_toml(&text)?;
            config.validate()?;
            println!("{}: ok ({})", file.display(), config.id);
            Ok(())
        }
        Command::Diff {
            manifest,
            golden_dir,
        } => {
            diff_golden(&manifest, &golden_dir)?;
            println!("{}: matches golden", manifest.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
