use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use dps_cli::args::Cli;
use dps_cli::commands::run;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let status = match run(&cli, &mut out) {
        Ok(exit) => exit.code(),
        Err(f) => {
            let _ = out.flush();
            eprintln!("dps: {}", f.message);
            f.exit.code()
        }
    };
    let _ = out.flush();
    ExitCode::from(status as u8)
}
