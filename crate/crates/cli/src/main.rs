//! `mfdb`: fit probabilistic aerodynamic surrogates, perturb turbulence
//! fields, estimate grid errors, and run Monte Carlo certification studies.

mod args;
mod commands;
mod report;

use std::process::ExitCode;

use clap::Parser;
use mfdb::{Error, ErrorKind};

use args::{Cli, Command};

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Usage => 2,
        ErrorKind::Data => 3,
        ErrorKind::Numerical => 4,
    }
}

fn is_broken_pipe(e: &Error) -> bool {
    let mut cur: Option<&(dyn std::error::Error + 'static)> = Some(e);
    while let Some(err) = cur {
        if let Some(io) = err.downcast_ref::<std::io::Error>() {
            return io.kind() == std::io::ErrorKind::BrokenPipe;
        }
        cur = err.source();
    }
    false
}

fn run(cli: &Cli) -> Result<(), Error> {
    let json = cli.json;
    match &cli.command {
        Command::Fit(a) => commands::fit(a, json)?,
        Command::Predict(a) => commands::predict(a)?,
        Command::Sample(a) => commands::sample(a)?,
        Command::Perturb(a) => commands::perturb_cmd(a)?,
        Command::Gci(a) => commands::gci(a, json)?,
        Command::Simulate(a) => commands::simulate_cmd(a, json)?,
        Command::Montecarlo(a) => commands::montecarlo(a, json)?,
        Command::Design(a) => commands::design(a, json)?,
    }
    commands::flush_stdout()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MFDB_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {msg}", e.tag());
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
