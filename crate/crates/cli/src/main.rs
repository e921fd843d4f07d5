//! `ensinfo`: CSV sweeps of thermal information quantities.
//!
//! Exit codes: 0 success, 1 output failure, 2 partial curve (some rows
//! flagged), 64 usage error.

mod args;
mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::CliError;

const EXIT_PARTIAL: u8 = 2;
const EXIT_USAGE: u8 = 64;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let (result, out) = match &cli.command {
        Command::Eval(a) => (commands::eval(a), a.output.out.as_deref()),
        Command::Fig1(a) => (commands::fig1(a), a.output.out.as_deref()),
        Command::Fig2(a) => (commands::fig2(a), a.output.out.as_deref()),
    };
    let curve = match result {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    if let Err(e) = commands::write_output(&curve, out) {
        return fail(e);
    }
    if curve.has_gaps() {
        let rows = curve.flags().iter().filter(|f| !f.is_empty()).count();
        eprintln!("ensinfo: {rows} of {} rows flagged", curve.len());
        ExitCode::from(EXIT_PARTIAL)
    } else {
        ExitCode::SUCCESS
    }
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("ensinfo: {e}");
    match e {
        CliError::Usage(_) => ExitCode::from(EXIT_USAGE),
        CliError::Runtime(_) => ExitCode::FAILURE,
    }
}
