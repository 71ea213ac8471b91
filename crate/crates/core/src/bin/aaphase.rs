use std::path::PathBuf;
use std::process::ExitCode;

use aaphase::cli::{run, Command, Overrides, EXIT_USAGE};
use clap::{Args, Parser, Subcommand};

/// Period, total phase and geometric phase of cyclic quantum evolutions.
#[derive(Parser)]
#[command(name = "aaphase", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Cyclicity verdict and phase report from the exact spectrum.
    Analyze(Opts),
    /// Compare the exact route with the time-evolution oracle.
    Verify(Opts),
    /// Candidate periods and phases from a partially known spectrum.
    Constrain(Opts),
}

#[derive(Args)]
struct Opts {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    n_range: Option<u32>,
    #[arg(long)]
    fidelity_tol: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let (command, opts) = match cli.command {
        Cmd::Analyze(o) => (Command::Analyze, o),
        Cmd::Verify(o) => (Command::Verify, o),
        Cmd::Constrain(o) => (Command::Constrain, o),
    };
    let overrides = Overrides {
        out: opts.out,
        n_range: opts.n_range,
        fidelity_tol: opts.fidelity_tol,
        t_max: opts.t_max,
    };
    ExitCode::from(run(command, &opts.config, &overrides) as u8)
}
