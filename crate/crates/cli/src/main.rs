use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nufrecon_cli::presets::{preset, PRESETS};
use nufrecon_cli::runner::default_output;
use nufrecon_cli::{run_experiment, run_suite, CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "nufrecon", version, about = "Reconstruction experiments from non-uniform Fourier data")]
struct Cli {
    /// Override every seed of the experiments.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Experiments run concurrently by `suite`.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment described by a TOML file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (defaults to the file's `output`, then out/<id>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run built-in presets and write a summary CSV.
    Suite {
        /// Comma-separated preset names, or "all".
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        presets: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the TOML files of the built-in presets.
    Presets {
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = cli.seed {
                cfg = cfg.with_seed(s);
            }
            let dir = out.unwrap_or_else(|| default_output(&cfg));
            let outcome = run_experiment(&cfg, &dir)?;
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            for r in &outcome.rows {
                println!("{} {} RE={:.4} jump={:.4} {:.2}s", r.experiment, r.method, r.relative_error, r.jump_error, r.seconds);
            }
            println!("wrote {}", dir.display());
        }
        Command::Suite { presets, out } => {
            let names: Vec<String> = if presets.iter().any(|p| p == "all") {
                PRESETS.iter().map(|s| s.to_string()).collect()
            } else {
                presets
            };
            let rows = run_suite(&names, &out, cli.threads, cli.seed)?;
            let mut failed = 0;
            for r in &rows {
                match r.relative_error {
                    Some(re) => println!("{} {} RE={re:.4}", r.experiment, r.method),
                    None => {
                        failed += 1;
                        eprintln!("{} {}", r.experiment, r.status);
                    }
                }
            }
            println!("wrote {}", out.join("summary.csv").display());
            if failed > 0 {
                return Err(suite_failure(failed));
            }
        }
        Command::Presets { out } => {
            std::fs::create_dir_all(&out)?;
            for name in PRESETS.iter().chain(&["table1_513"]) {
                for cfg in preset(name)? {
                    std::fs::write(out.join(format!("{}.toml", cfg.id)), cfg.to_toml())?;
                }
            }
        }
    }
    Ok(())
}

fn suite_failure(count: usize) -> CliError {
    CliError::Experiment(nufrecon::ReconError::NumericFailure(format!("{count} experiment(s) failed")))
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
