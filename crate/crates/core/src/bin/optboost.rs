use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use optboost::experiment::{
    inspect, run_experiment, synth, ExperimentConfig, SynthKind, SynthParams,
};

#[derive(Parser)]
#[command(
    name = "optboost",
    version,
    about = "Optimal AdaBoost dynamics and diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run { config: PathBuf },
    /// Write a synthetic dataset as CSV.
    Synth {
        /// two_gaussians, rudin3 or xor_grid
        kind: SynthKind,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 1.0)]
        separation: f64,
        #[arg(long, default_value_t = 0.37)]
        xor_cut: f64,
    },
    /// Summarize an artifact directory.
    Inspect { dir: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            let report = serde_json::json!({ "error": format!("{e:#}") });
            eprintln!("{report}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            let base = config.parent().unwrap_or(Path::new(""));
            let outcome = run_experiment(&cfg, base)?;
            let s = &outcome.summary;
            println!(
                "{}: {} after {} of {} rounds, artifacts in {}",
                s.run_id,
                s.halt.name(),
                s.rounds_completed,
                s.rounds_requested,
                outcome.output_dir.display()
            );
            if !s.halt.is_completed() {
                eprintln!(
                    "{}",
                    serde_json::json!({ "run_id": s.run_id, "halt": s.halt })
                );
            }
            Ok(ExitCode::from(outcome.exit_code() as u8))
        }
        Command::Synth {
            kind,
            out,
            seed,
            m,
            dim,
            separation,
            xor_cut,
        } => {
            let params = SynthParams {
                m,
                dim,
                separation,
                xor_cut,
            };
            let ds = synth(kind, &params, seed)?;
            ds.save_csv(&out)?;
            println!("wrote {} examples to {}", ds.len(), out.display());
            if kind == SynthKind::Rudin3 {
                println!("note: rudin3 needs \"include_constant\": true");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Inspect { dir } => {
            print!("{}", inspect(&dir)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}
