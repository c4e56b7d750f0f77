use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use lbcalc_cli::{execute, parse, EXIT_USAGE};

fn main() -> ExitCode {
    let command = match parse(std::env::args_os().skip(1)) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let outcome = execute(&command);
    let _ = writeln!(std::io::stdout(), "{}", outcome.render());
    if let Some(message) = outcome.report.pointer("/error/message").and_then(|m| m.as_str()) {
        eprintln!("lbcalc: {message}");
    }
    ExitCode::from(outcome.code as u8)
}
