//! Flat `key = value` config files. Entries become `--key=value` flags placed
//! ahead of the command-line flags of the same command, so explicit flags
//! take precedence.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use clap::{Arg, Command, CommandFactory};

use crate::args::Cli;
use crate::error::{CliError, CliResult};

const GLOBAL_VALUED: [&str; 3] = ["--config", "--threads", "--format"];

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

pub fn parse(text: &str) -> CliResult<Vec<Entry>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split_once('#').map_or(raw, |(a, _)| a).trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("config line {}: expected key = value", i + 1)))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() {
            return Err(CliError::config(format!("config line {}: empty key", i + 1)));
        }
        out.push(Entry {
            line: i + 1,
            key,
            value: value.trim().to_string(),
        });
    }
    Ok(out)
}

fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            return None;
        }
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

/// Index of the subcommand token.
fn subcommand_at(argv: &[OsString], cmd: &Command) -> Option<usize> {
    let mut i = 1;
    while i < argv.len() {
        let s = argv[i].to_string_lossy();
        if GLOBAL_VALUED.contains(&s.as_ref()) {
            i += 2;
            continue;
        }
        if !s.starts_with('-') {
            return cmd.find_subcommand(s.as_ref()).map(|_| i);
        }
        i += 1;
    }
    None
}

fn find_long<'a>(cmd: &'a Command, key: &str) -> Option<&'a Arg> {
    cmd.get_arguments().find(|a| a.get_long() == Some(key))
}

fn as_flags(entry: &Entry, arg: &Arg, source: &Path) -> CliResult<Option<OsString>> {
    let key = &entry.key;
    if arg.get_action().takes_values() {
        return Ok(Some(format!("--{key}={}", entry.value).into()));
    }
    match entry.value.as_str() {
        "true" => Ok(Some(format!("--{key}").into())),
        "false" => Ok(None),
        v => Err(CliError::config(format!(
            "{} line {}: '{key}' is a switch, expected true or false, got '{v}'",
            source.display(),
            entry.line
        ))),
    }
}

/// Rewrite `argv` with the entries of the `--config` file, if any.
pub fn expand(argv: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let path = Path::new(&path);
    let text = fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let entries = parse(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::config(format!("{}: {m}", path.display())),
        other => other,
    })?;
    let root = Cli::command();
    let Some(at) = subcommand_at(&argv, &root) else {
        return Ok(argv);
    };
    let name = argv[at].to_string_lossy().into_owned();
    let sub = root.find_subcommand(&name).expect("located above");

    let (mut global, mut local) = (Vec::new(), Vec::new());
    for e in &entries {
        let unknown = || {
            CliError::config(format!(
                "{} line {}: unknown key '{}' for '{name}'",
                path.display(),
                e.line,
                e.key
            ))
        };
        if e.key == "config" {
            return Err(unknown());
        }
        if let Some(arg) = find_long(&root, &e.key) {
            global.extend(as_flags(e, arg, path)?);
        } else {
            let arg = find_long(sub, &e.key).ok_or_else(unknown)?;
            local.extend(as_flags(e, arg, path)?);
        }
    }
    let mut out = Vec::with_capacity(argv.len() + entries.len());
    out.push(argv[0].clone());
    out.extend(global);
    out.extend(argv[1..=at].iter().cloned());
    out.extend(local);
    out.extend(argv[at + 1..].iter().cloned());
    Ok(out)
}
