use std::process::ExitCode;

use clap::Parser;
use fakebm::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("FAKEBM_WORKERS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("fakebm: cannot size worker pool: {e}");
        }
    }
    match run(&cli) {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(e) => {
            eprintln!("fakebm: {e}");
            ExitCode::from(2)
        }
    }
}
