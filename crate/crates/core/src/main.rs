use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

/// Batch runner for the fractional Boussinesq solver and its norm checks.
#[derive(Parser, Debug)]
#[command(name = "fracbq", version, about)]
struct Cli {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed, overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress the summary line.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var("FRACBQ_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                fracbq::par::limit_threads(n);
            }
            _ => {
                eprintln!("FRACBQ_THREADS must be a positive integer, got `{v}`");
                return ExitCode::from(2);
            }
        }
    }
    let outcome = fracbq::io::run_from_path(&cli.config, cli.out, cli.seed);
    if outcome.code == 0 {
        if !cli.quiet {
            println!("{}", outcome.message);
        }
    } else {
        eprintln!("{}", outcome.message);
    }
    ExitCode::from(outcome.code as u8)
}
