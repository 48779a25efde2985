//! `digilab` command-line front end.
//!
//! Every command reads a sequence spec (a file path or inline JSON), runs one
//! operation and writes CSV or JSON to `--out` or standard output. Exit codes:
//! 0 success, 1 usage or operation error, 2 spec parse error, 3 resource cap.

mod args;
mod commands;
mod render;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::Cli;
use crate::commands::run;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commands::Failure;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn failure_codes() {
        assert_eq!(Failure::Usage(String::new()).code(), 1);
        assert_eq!(Failure::from(digilab::Error::Spec("x".into())).code(), 2);
        assert_eq!(Failure::from(digilab::Error::ResourceCap("x".into())).code(), 3);
        assert_eq!(
            Failure::from(digilab::Error::TooLargeInterval { count: 9, cap: 1 }).code(),
            3
        );
        assert_eq!(Failure::from(digilab::Error::InvalidBase(1)).code(), 1);
    }
}
