use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use penalfd_cli::{run, Command, RunSpec};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    /// Single solve: solution.csv and errors.csv.
    Solve,
    /// Penalization sweep at fixed N: errors.csv and orders.csv.
    SweepEps,
    /// Mesh sweep at fixed eps: errors.csv and orders.csv.
    SweepH,
    /// Boundary-layer thickness along a cut line: blayer.csv.
    Blayer,
    /// Condition numbers versus eps: condnum.csv.
    Condnum,
    /// Explicit supersolution checks: supersol.csv.
    Supersol,
}

#[derive(Debug, Parser)]
#[command(name = "penalfd", version, about = "Volume-penalization experiments for -Δu + u = f with Robin conditions")]
struct Args {
    #[arg(value_enum)]
    command: Cmd,

    /// Run configuration (TOML).
    #[arg(long, value_name = "FILE")]
    config: PathBuf,

    /// Output directory for the CSV files.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,

    /// Upper bound on parameter points solved concurrently.
    #[arg(long, value_name = "K", value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,

    /// Permit the second-order scheme on the disk obstacle.
    #[arg(long)]
    allow_upwind2_disk: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let spec = RunSpec {
        command: match args.command {
            Cmd::Solve => Command::Solve,
            Cmd::SweepEps => Command::SweepEps,
            Cmd::SweepH => Command::SweepH,
            Cmd::Blayer => Command::Blayer,
            Cmd::Condnum => Command::Condnum,
            Cmd::Supersol => Command::Supersol,
        },
        config: args.config,
        out: args.out,
        jobs: args.jobs.map(|k| k as usize),
        allow_upwind2_disk: args.allow_upwind2_disk,
    };
    match run(&spec) {
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
