mod args;
mod commands;
mod report;

use std::process::ExitCode;

use clap::Parser;

use args::{Args, Command};

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn configure_threads() {
    let Ok(text) = std::env::var("MOMENTFLOW_THREADS") else { return };
    match text.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            // Only fails if a pool already exists, which cannot happen this early.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        _ => eprintln!("warning: ignoring MOMENTFLOW_THREADS={text}"),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    configure_threads();
    let result = match args.command {
        Command::Propagate => commands::propagate(&args),
        Command::Benchmark => commands::benchmark(&args),
        Command::Compare => commands::compare(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { EXIT_VALIDATION } else { EXIT_NUMERICAL })
        }
    }
}
