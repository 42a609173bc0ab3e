use std::path::PathBuf;
use std::process::ExitCode;

use chirp_ladder_cli::{cmd_classical, cmd_isomorphism, cmd_simulate, cmd_threshold, cmd_wigner, CliError, RunConfig};
use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "chirp-ladder", version, about = "Chirped-drive ladder climbing and autoresonance simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Dotted `key=value` override applied to the config, e.g. `params.epsilon=0.2`.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Propagate and write the trajectory, amplitudes and summary.
    Simulate,
    /// Wigner function at `wigner.tau`.
    Wigner,
    /// Bisected capture threshold for each `threshold.p2` column.
    Threshold,
    /// Subharmonic run against its effective fundamental twin.
    Isomorphism,
    /// Classical trace and optional classical threshold map.
    Classical,
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let path = cli.config.ok_or_else(|| CliError::Usage("--config is required".into()))?;
    let config = RunConfig::load(&path, &cli.overrides)?;
    let out = cli.out.or_else(|| config.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(k);
    }
    let pool = pool.build().map_err(|e| CliError::Usage(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Simulate => cmd_simulate(&config, &out),
        Command::Wigner => cmd_wigner(&config, &out),
        Command::Threshold => cmd_threshold(&config, &out),
        Command::Isomorphism => cmd_isomorphism(&config, &out),
        Command::Classical => cmd_classical(&config, &out),
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
