use std::process::ExitCode;

use clap::Parser;
use zetagap::cli::{self, Cli};

fn main() -> ExitCode {
    let args = Cli::parse();
    match cli::run(&args) {
        Ok(out) => {
            print!("{}", out.json);
            ExitCode::SUCCESS
        }
        Err(e) => {
            let code = e.exit_code();
            let err = anyhow::Error::new(e).context(format!("zetagap {} failed", args.command.name()));
            eprintln!("error: {err:#}");
            ExitCode::from(code as u8)
        }
    }
}
