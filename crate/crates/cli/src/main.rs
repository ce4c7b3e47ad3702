use std::process::ExitCode;

use clap::Parser;
use rxnident_cli::{configure_threads, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let arguments: Vec<String> = std::env::args().skip(1).collect();
    let result = configure_threads().and_then(|()| run(&cli, &arguments));
    match result {
        Ok(rendered) => {
            print!("{}", rendered.stdout);
            ExitCode::from(rendered.exit_code)
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(2)
        }
    }
}
