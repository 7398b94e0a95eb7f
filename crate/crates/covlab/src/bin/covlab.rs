//! Command line front end for the covering laboratory.
//!
//! Exit codes: 0 on full success, 2 when some sweep points failed but the
//! run produced output, 1 on configuration or setup errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use covlab::config::parse_config;
use covlab::covering::inequality_grid_holds;
use covlab::experiment::{emit_csv, emit_summary, run_experiment, run_region};

#[derive(Parser)]
#[command(name = "covlab", disable_version_flag = true)]
struct Cli {
    /// Directory for CSV, summary and manifest files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Worker thread count; 0 lets the runtime decide.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Override the seed from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the covering sweep of a config file.
    Run { config: PathBuf },
    /// Run the rate region sweep of a config file.
    Region { config: PathBuf },
    /// Verify the (1-xy)^n <= 1-x+e^(-yn) bound on a dense grid.
    CheckInequality,
    /// Print the version string.
    Version,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("thread pool setup failed: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("{message}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, String> {
    match &cli.command {
        Command::Version => {
            println!("covlab {}", env!("CARGO_PKG_VERSION"));
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckInequality => {
            let holds = inequality_grid_holds(101, 100).map_err(|e| e.to_string())?;
            if holds {
                println!("inequality holds on the 101x101x100 grid");
                Ok(ExitCode::SUCCESS)
            } else {
                Err("inequality violated on the grid".to_string())
            }
        }
        Command::Run { config } => {
            let config = load_config(config, cli.seed)?;
            let run = run_experiment(&config)?;
            write_out(cli, "results.csv", &emit_csv(&config.scenario_id, &run.outcomes))?;
            write_out(
                cli,
                "summary.txt",
                &emit_summary(&config.scenario_id, &run.outcomes),
            )?;
            write_out(cli, "manifest.txt", &run.manifest.render())?;
            if run.failed_points() > 0 {
                eprintln!("{} sweep point(s) failed; see results.csv", run.failed_points());
                Ok(ExitCode::from(2))
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }
        Command::Region { config } => {
            let config = load_config(config, cli.seed)?;
            let (csv, manifest) = run_region(&config)?;
            write_out(cli, "frontier.csv", &csv)?;
            write_out(cli, "manifest.txt", &manifest.render())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load_config(path: &PathBuf, seed: Option<u64>) -> Result<covlab::config::ExperimentConfig, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut config = parse_config(&text).map_err(|errors| {
        errors
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join("\n")
    })?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    Ok(config)
}

fn write_out(cli: &Cli, name: &str, content: &str) -> Result<(), String> {
    fs::create_dir_all(&cli.out)
        .map_err(|e| format!("cannot create {}: {e}", cli.out.display()))?;
    let path = cli.out.join(name);
    fs::write(&path, content).map_err(|e| format!("cannot write {}: {e}", path.display()))
}
