//! `darkstate` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 when the system has no
//! time-independent frame (`rwa`, and any command needing one) or no dark
//! state (`classify`).

mod cli;
mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use cli::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    darkstate_core::parallel::configure_threads();
    match commands::run(cli.command) {
        Ok(status) => ExitCode::from(status),
        Err(err) => {
            eprintln!("error: {err:#}");
            let infeasible = matches!(
                err.downcast_ref::<darkstate_core::Error>(),
                Some(darkstate_core::Error::InfeasibleFrame { .. })
            );
            ExitCode::from(if infeasible { 2 } else { 1 })
        }
    }
}
