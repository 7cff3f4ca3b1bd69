//! Thin experiment-runner binary over the `noma_mc` library.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime/I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use noma_mc::cli::config::{parse_config, ExperimentConfig};
use noma_mc::cli::scenario::{preset_config, run_scenario, Preset};

#[derive(Parser)]
#[command(
    name = "noma-mc",
    about = "Seeded Monte Carlo experiments for NOMA multiple access",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario described by a TOML config file.
    Run {
        /// Path to the experiment config.
        #[arg(long)]
        config: PathBuf,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker thread count (results are identical for any value).
        #[arg(long)]
        workers: Option<usize>,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a built-in experiment preset.
    Preset {
        name: PresetName,
        /// Output directory (default: ./noma-mc-out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetName {
    #[value(name = "fig2_style")]
    Fig2Style,
    #[value(name = "fig3_style")]
    Fig3Style,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (config, workers) = match cli.command {
        Command::Run {
            config,
            seed,
            workers,
            out,
        } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(text) => text,
                Err(err) => {
                    eprintln!("error: cannot read config {}: {err}", config.display());
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            let mut parsed: ExperimentConfig = match parse_config(&text) {
                Ok(parsed) => parsed,
                Err(err) => {
                    eprintln!("error: {err}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            if let Some(seed) = seed {
                parsed.seed = seed;
            }
            if let Some(out) = out {
                parsed.output_dir = out;
            }
            (parsed, workers)
        }
        Command::Preset { name, out } => {
            let preset = match name {
                PresetName::Fig2Style => Preset::Fig2Style,
                PresetName::Fig3Style => Preset::Fig3Style,
            };
            let out = out.unwrap_or_else(|| PathBuf::from("noma-mc-out"));
            (preset_config(preset, out), None)
        }
    };

    match run_scenario(&config, workers) {
        Ok(output) => {
            for file in output.files {
                println!("wrote {}", file.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
