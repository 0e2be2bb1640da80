use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use spinorbit_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
                return ExitCode::from(3);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("spinorbit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
