use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use scramble_cli::{config, presets, resolve_workers, run, RunError, WORKERS_ENV};

#[derive(Parser)]
#[command(name = "scramble", version, about = "Exact-diagonalization scrambling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file and/or a preset.
    Run {
        /// TOML config file.
        config: Option<PathBuf>,
        /// Start from a built-in preset (see `scramble presets`).
        #[arg(long)]
        preset: Option<String>,
        /// Override a config key, e.g. `--set n_qubits=8` or `--set models.0.alpha=2.5`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Output directory (same as `--set output_dir=...`).
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Worker threads.
        #[arg(long, env = WORKERS_ENV)]
        workers: Option<usize>,
    },
    /// List built-in presets.
    Presets,
    /// Resolve and check a config without running it.
    Validate {
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Print the resolved config as TOML.
        #[arg(long)]
        print: bool,
    },
}

fn require_source(config: &Option<PathBuf>, preset: &Option<String>) -> Result<(), RunError> {
    if config.is_none() && preset.is_none() {
        return Err(RunError::Schema("give a config file or --preset NAME".into()));
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Presets => {
            print!("{}", presets::listing());
            Ok(())
        }
        Command::Validate {
            config,
            preset,
            overrides,
            print,
        } => {
            require_source(&config, &preset)?;
            let c = config::load(config.as_deref(), preset.as_deref(), &overrides)?;
            if print {
                let text = toml::to_string_pretty(&c).map_err(|e| RunError::Schema(e.to_string()))?;
                print!("{text}");
            } else {
                let times = c.time.times()?;
                println!(
                    "ok: pipeline {:?}, N = {:?}, {} model(s), {} time points, output {}",
                    c.pipeline,
                    c.all_sizes(),
                    c.models.len(),
                    times.len(),
                    c.output_dir.display()
                );
            }
            Ok(())
        }
        Command::Run {
            config,
            preset,
            mut overrides,
            output,
            workers,
        } => {
            require_source(&config, &preset)?;
            if let Some(dir) = output {
                overrides.push(format!("output_dir={}", toml::Value::String(dir.display().to_string())));
            }
            let c = config::load(config.as_deref(), preset.as_deref(), &overrides)?;
            let workers = resolve_workers(workers, &c);
            let summary = run(&c, workers)?;
            for f in &summary.files {
                println!("{}", f.display());
            }
            eprintln!(
                "finished in {:.2} s with {} worker(s)",
                summary.wall_time_seconds, summary.workers
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("scramble: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
