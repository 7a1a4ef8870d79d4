use std::process::ExitCode;

use clap::Parser;
use zap_cli::app::{run, Cli, EXIT_ERROR};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli, &mut std::io::stdout().lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("zap: {e}");
            EXIT_ERROR
        }
    };
    ExitCode::from(code as u8)
}
