use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use oneway_noise::experiment::{self, ExperimentConfig, PRESETS};
use oneway_noise::verify::{self, Tolerance};

/// Noisy one-way computation: fidelity sweeps and acceptance checks.
#[derive(Parser)]
#[command(name = "oneway", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write CSV plus a JSON sidecar.
    Run {
        /// Experiment config (JSON).
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Built-in config instead of --config.
        #[arg(long)]
        preset: Option<String>,
        /// CSV path; defaults to the config's `output`, then `<name>.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the acceptance checks and print a pass/fail table.
    Verify {
        /// Only criteria whose id, tag or name matches.
        #[arg(long)]
        filter: Option<String>,
        /// Multiplies every tolerance (values below 1 tighten the checks).
        #[arg(long, default_value_t = 1.0, hide = true)]
        tolerance_scale: f64,
    },
    /// List the built-in configs, or print one.
    Presets {
        name: Option<String>,
    },
}

fn run(config: Option<PathBuf>, preset: Option<String>, out: Option<PathBuf>, seed: Option<u64>) -> oneway_noise::Result<()> {
    let mut cfg = match (config, preset) {
        (Some(path), _) => ExperimentConfig::load(&path)?,
        (None, Some(name)) => experiment::preset(&name)?,
        (None, None) => return Err(oneway_noise::Error::Config("pass --config PATH or --preset NAME".into())),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let out = out
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", cfg.name.as_deref().unwrap_or(&cfg.protocol))));
    let table = experiment::run(&cfg, &out)?;
    println!(
        "wrote {} rows to {} (sidecar {})",
        table.rows.len(),
        out.display(),
        experiment::sidecar_path(&out).display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, preset, out, seed } => match run(config, preset, out, seed) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
        Command::Verify { filter, tolerance_scale } => {
            let results = verify::run_all(filter.as_deref(), Tolerance { scale: tolerance_scale });
            if results.is_empty() {
                eprintln!("error: no criterion matches the filter");
                return ExitCode::FAILURE;
            }
            for r in &results {
                println!("{}", verify::format_line(r));
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            println!("{} passed, {failed} failed", results.len() - failed);
            if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Command::Presets { name: None } => {
            for name in PRESETS {
                let cfg = experiment::preset(name).expect("built-in preset");
                println!("{name:<8} {} -> {}", cfg.protocol, cfg.columns().join(","));
            }
            ExitCode::SUCCESS
        }
        Command::Presets { name: Some(name) } => match experiment::preset(&name) {
            Ok(cfg) => {
                println!("{}", cfg.to_json());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
    }
}
