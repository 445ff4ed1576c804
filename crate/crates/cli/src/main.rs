use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = cubic_cli::Cli::parse();
    let result = cubic_cli::run(&cli);
    match &result {
        Ok(o) => {
            for f in &o.failures {
                eprintln!("invariant failed: {f}");
            }
        }
        Err(e) => eprintln!("error: {e:#}"),
    }
    ExitCode::from(cubic_cli::exit_code(&result))
}
