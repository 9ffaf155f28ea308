//! `phaselip`: batch front end for frame checks, reconstruction and probes.

mod check;
mod common;
mod gen;
mod probe;
mod reconstruct;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "phaselip", version, about = "Lipschitz-stable phase retrieval toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a frame and write it as JSON.
    Gen(gen::GenArgs),
    /// Estimate a0 and b0 of a frame and decide phase retrievability.
    Check(check::CheckArgs),
    /// Reconstruct rays from measurement rows.
    Reconstruct(reconstruct::ReconstructArgs),
    /// Run an empirical bound probe.
    Probe(probe::ProbeArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { common::EXIT_USAGE } else { common::EXIT_OK });
        }
    };
    let outcome = match &cli.command {
        Command::Gen(args) => gen::run(args),
        Command::Check(args) => check::run(args),
        Command::Reconstruct(args) => reconstruct::run(args),
        Command::Probe(args) => probe::run(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("phaselip: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
