mod args;
mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
#[cfg(test)]
use clap::CommandFactory;

use args::{Cli, Command};
use commands::Failure;

const SUBCOMMANDS: [&str; 5] = ["solve", "compare", "lle", "modes", "steepness"];

/// Finds `--config FILE` / `--config=FILE` and the subcommand token.
fn config_request(argv: &[OsString]) -> Option<(PathBuf, String)> {
    let mut path = None;
    let mut sub = None;
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        } else if s == "--config" {
            path = it.next().map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        } else if sub.is_none() && SUBCOMMANDS.contains(&s.as_ref()) {
            sub = Some(s.into_owned());
        }
    }
    Some((path?, sub?))
}

fn run(argv: Vec<OsString>) -> Result<i32, Failure> {
    let argv = match config_request(&argv) {
        Some((path, sub)) => config::splice(&argv, &sub, &path).map_err(Failure::Usage)?,
        None => argv,
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return Ok(match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            });
        }
    };
    let g = &cli.global;
    match &cli.command {
        Command::Solve(a) => commands::solve(g, a),
        Command::Compare(a) => commands::compare(g, a),
        Command::Lle(a) => commands::lle_cmd(g, a),
        Command::Modes(a) => commands::modes_cmd(g, a),
        Command::Steepness(a) => commands::steepness_cmd(g, a),
    }
}

fn main() -> ExitCode {
    let code = match run(std::env::args_os().collect()) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.code()
        }
    };
    ExitCode::from(code as u8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn config_flag_is_found_in_both_spellings() {
        let argv: Vec<OsString> = ["gwrm", "--config", "a.cfg", "solve"].iter().map(OsString::from).collect();
        assert_eq!(config_request(&argv), Some((PathBuf::from("a.cfg"), "solve".to_string())));
        let argv: Vec<OsString> = ["gwrm", "modes", "--config=b.cfg"].iter().map(OsString::from).collect();
        assert_eq!(config_request(&argv), Some((PathBuf::from("b.cfg"), "modes".to_string())));
    }
}
