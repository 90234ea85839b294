//! `liftkit`: verify, analyse and construct lifted Lindbladians.

mod commands;
mod config;
mod plotdata;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::CliError;
use config::{Flags, RunConfig};

#[derive(Parser)]
#[command(name = "liftkit", version, about = "Second-order lifts of quantum Markov semigroups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Check the structural conditions of a lift.
    Verify,
    /// Overdamped generator and the ε → 0 error study.
    Overdamped,
    /// Conditions, rate bounds and empirical rates over a γ grid.
    Analyze,
    /// Build the lift of a birth-death chain and analyse it.
    LiftChain,
    /// Build the GNS lift of a detailed-balance GKSL generator.
    LiftQms,
    /// Empirical and lower-bound rates over a γ grid.
    SweepGamma,
    /// Best empirical rate against √λ across system sizes.
    Scaling,
    /// Matrix inequality certificate of a chain lift.
    Certificate,
}

fn run(cmd: Command, cfg: &RunConfig) -> commands::CliResult {
    match cmd {
        Command::Verify => commands::verify(cfg),
        Command::Overdamped => commands::overdamped(cfg),
        Command::Analyze => commands::analyze(cfg),
        Command::LiftChain => commands::lift_chain(cfg),
        Command::LiftQms => commands::lift_qms(cfg),
        Command::SweepGamma => commands::sweep_gamma(cfg),
        Command::Scaling => commands::scaling(cfg),
        Command::Certificate => commands::certificate(cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap exits with 2 on usage errors; 2 is reserved for failed checks.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let cfg = match RunConfig::resolve(&cli.flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match run(cli.command, &cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(CliError::Failed(e)) => {
            eprintln!("fail: {e}");
            ExitCode::from(2)
        }
    }
}
