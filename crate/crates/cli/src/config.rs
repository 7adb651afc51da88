//! `key = value` config files, merged as if the pairs were flags written
//! right after the subcommand (so real flags, which come later, win).

use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context};
use clap::CommandFactory;

use crate::args::Cli;

pub fn parse_pairs(text: &str) -> anyhow::Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("line {}: expected `key = value`", n + 1);
        };
        let key = k.trim().trim_start_matches("--").to_string();
        if key.is_empty() {
            bail!("line {}: empty key", n + 1);
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

/// Rewrites `argv` with the file's pairs spliced in after the subcommand.
pub fn splice(argv: &[OsString], subcommand: &str, path: &Path) -> anyhow::Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let pairs = parse_pairs(&text)?;
    let cmd = Cli::command();
    let sub = cmd.find_subcommand(subcommand).context("unknown subcommand")?;
    let mut extra: Vec<OsString> = Vec::new();
    for (key, value) in pairs {
        if key == "config" {
            bail!("config files cannot include other config files");
        }
        let arg = sub
            .get_arguments()
            .chain(cmd.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()))
            .with_context(|| format!("unknown config key '{key}'"))?;
        if arg.get_action().takes_values() {
            extra.push(format!("--{key}").into());
            extra.push(value.into());
        } else {
            match value.as_str() {
                "true" | "yes" | "1" => extra.push(format!("--{key}").into()),
                "false" | "no" | "0" => {}
                other => bail!("config key '{key}' is a switch; got '{other}'"),
            }
        }
    }
    let pos = argv
        .iter()
        .skip(1)
        .position(|a| a == subcommand)
        .map(|i| i + 2)
        .context("subcommand not found on the command line")?;
    let mut out = argv[..pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[pos..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_skip_comments_and_blank_lines() {
        let p = parse_pairs("# header\nK = 6\n\nepsilon=1e-3 # tail\nparam = a=0.5\n").unwrap();
        assert_eq!(
            p,
            vec![
                ("K".into(), "6".into()),
                ("epsilon".into(), "1e-3".into()),
                ("param".into(), "a=0.5".into())
            ]
        );
        assert!(parse_pairs("no equals sign").is_err());
    }
}
