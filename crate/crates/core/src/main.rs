use std::process::ExitCode;

use clap::Parser;
use contentmap::harness::{run, Cli, WORKERS_ENV};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(workers) = std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(err) = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global() {
            eprintln!("contentmap: cannot size worker pool: {err}");
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("contentmap: {err}");
            ExitCode::from(2)
        }
    }
}
