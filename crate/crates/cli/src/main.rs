use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use qrcp_cli::commands::pretty;
use qrcp_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            // a closed pipe on stdout should not turn a verdict into a panic
            let _ = stdout.write_all(pretty(&out.summary).as_bytes());
            eprintln!("{}", out.note);
            ExitCode::from(out.exit_code as u8)
        }
        Err(e) => {
            eprintln!("qrcp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
