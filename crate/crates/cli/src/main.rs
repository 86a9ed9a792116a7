//! `rolekit` batch command line.
//!
//! Exit status: 0 on success, 2 for invalid flags or values (with usage),
//! 1 when a computation fails (`error [module]: ...` on stderr).

mod analyze;
mod args;
mod artifacts;
mod config_file;
mod evaluate;
mod features;
mod fit;
mod synth;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use artifacts::Failure;

fn run(cli: &Cli, argv: &[String]) -> Result<(), Failure> {
    match &cli.command {
        Command::Features(a) => features::run(a, argv),
        Command::Glrd(a) => fit::glrd(a, argv),
        Command::Mrd(a) => fit::mrd(a, argv),
        Command::Transfer(a) => fit::transfer(a, argv),
        Command::Heatmap(a) => fit::heatmap(a, argv),
        Command::Analyze(a) => analyze::run(a, argv),
        Command::Resolve(a) => evaluate::resolve(a, argv),
        Command::Compare(a) => evaluate::compare(a, argv),
        Command::Synth(a) => synth::run(a, argv),
    }
}

fn main() -> ExitCode {
    let raw: Vec<String> = std::env::args().collect();
    let argv = match config_file::inject(&raw) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error [cli]: {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::try_parse_from(&argv).unwrap_or_else(|e| e.exit());

    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).format_timestamp(None).init();

    match run(&cli, &argv[1..]) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error [{}]: {}", f.module, f.message);
            ExitCode::from(if f.usage { 2 } else { 1 })
        }
    }
}
