use std::path::PathBuf;
use std::process::ExitCode;

use basinctl::{run, Command, Format, Options};
use clap::Parser;

/// Basin-of-attraction control for multistable ODE models.
#[derive(Debug, Parser)]
#[command(name = "basinctl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads for basin sampling.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the census and basin seeds.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("BASINCTL_LOG", "warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("basinctl: configuration error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("basinctl: {e}");
            return ExitCode::from(3);
        }
    }
    let opts = Options {
        config: cli.config,
        out: cli.out,
        format: cli.format,
        seed: cli.seed,
    };
    match run(cli.command, &opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("basinctl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
