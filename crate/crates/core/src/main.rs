use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use critgraph::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if cli.common.out.is_none() {
                let mut stdout = std::io::stdout().lock();
                if stdout.write_all(out.body.as_bytes()).is_err() {
                    return ExitCode::FAILURE;
                }
            }
            eprintln!("{}", out.summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("critgraph: {e}");
            ExitCode::from(2)
        }
    }
}
