use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use gapfield_cli::{configure_threads, parse_config, run, CliError, Command, RunOptions};

#[derive(Parser, Debug)]
#[command(name = "gapfield", version, about = "Field concentration between two nearly touching disks")]
struct Args {
    command: Command,
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Nodes per circle; overrides `discretization.n_per_circle`.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    quiet: bool,
}

fn execute(args: &Args) -> Result<i32, CliError> {
    configure_threads(std::env::var("GAPFIELD_THREADS").ok().as_deref())?;
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;
    let mut cfg = parse_config(&text)?;
    if let Some(n) = args.n {
        cfg.discretization.n_per_circle = n;
        cfg.validate()?;
    }
    let out_dir = args.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let outcome = run(args.command, &cfg, &RunOptions { out_dir, quiet: args.quiet })?;
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Config(e.to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(2);
        }
    };
    let level = if args.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
